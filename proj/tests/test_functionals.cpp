#include "catch2/catch_amalgamated.hpp"

#include <cmath>

#include "hardycert/functionals.hpp"
#include "hardycert/util.hpp"

using namespace hardycert;

namespace {

ConfigFields unit_square_fields(int cells, const Exponents& e) {
	auto g = Grid<2>::linear_uniform(1e-9, 1.0, cells);
	auto v = Weight<2>::power(1.0, {0.0, 0.0});
	auto w = Weight<2>::power(1.0, {0.0, 0.0});
	return ConfigFields::make(v, w, g, e);
}

// cumulations rebuilt with quadruple loops instead of running sums
struct BruteCumulations {
	std::vector<std::vector<double>> sig_pre, w_suf;  // node-indexed
	BruteCumulations(const CellField<2>& sig, const CellField<2>& w) {
		const auto& g = *sig.grid();
		const int n0 = g.cells(0), n1 = g.cells(1);
		sig_pre.assign(n0 + 1, std::vector<double>(n1 + 1, 0.0));
		w_suf.assign(n0 + 1, std::vector<double>(n1 + 1, 0.0));
		for (int i = 0; i <= n0; ++i)
			for (int j = 0; j <= n1; ++j)
				for (int a = 0; a < n0; ++a)
					for (int b = 0; b < n1; ++b) {
						const double vol = g.width(0, a) * g.width(1, b);
						if (a < i && b < j) sig_pre[i][j] += sig.at({a, b}) * vol;
						if (a >= i && b >= j) w_suf[i][j] += w.at({a, b}) * vol;
					}
	}
};

}  // namespace

TEST_CASE("explicit constants match frozen arithmetic", "[functionals]") {
	CHECK(alpha_const(2.0, 3.0) == Catch::Approx(8.0).epsilon(1e-14));
	CHECK(alpha_const(1.5, 2.0) == Catch::Approx(4.5).epsilon(1e-14));
	CHECK(beta_const(4.0, 2.0) == Catch::Approx(8.0 / (std::sqrt(2.0) - 1.0)).epsilon(1e-13));
	CHECK(beta_const(3.0, 2.0) == Catch::Approx(38.77857681490458).epsilon(1e-13));
	CHECK(bold_beta_const(3.0, 2.0) == Catch::Approx(4.133311130708093).epsilon(1e-13));
	CHECK(bold_beta_const(2.0, 1.5) == Catch::Approx(5.853887429877719).epsilon(1e-13));

	auto e_growth = Exponents::make(2.0, 3.0);
	auto cg = constants(e_growth);
	CHECK(cg.c_lower == 1.0);
	REQUIRE(cg.alpha.has_value());
	CHECK(*cg.alpha == Catch::Approx(8.0));
	CHECK(*cg.alpha_conj == Catch::Approx(4.5));
	CHECK(*cg.C_upper == Catch::Approx(260051.33890485275).epsilon(1e-12));
	CHECK(cg.C_sum == Catch::Approx(218700.59729338976).epsilon(1e-12));
	CHECK(cg.sum_route == "A1+A2+A3");
	CHECK_FALSE(cg.beta.has_value());

	auto e_decay = Exponents::make(3.0, 2.0);
	auto cd = constants(e_decay);
	CHECK(cd.c_lower == Catch::Approx(0.1443375672974065).epsilon(1e-13));
	CHECK(*cd.beta == Catch::Approx(38.77857681490458).epsilon(1e-13));
	CHECK(*cd.beta_conj == Catch::Approx(42.28170806306598).epsilon(1e-13));
	CHECK(*cd.C_upper == Catch::Approx(47728.9531218261).epsilon(1e-12));
	CHECK(cd.b_zone == 1);  // r=6: r/p=2, r/q'=3
	CHECK(cd.C_sum == Catch::Approx(4311.374714397161).epsilon(1e-12));
	CHECK(cd.sum_route == "B1+B2+B3");

	auto c4 = constants(Exponents::make(4.0, 2.0));
	CHECK(c4.c_lower == Catch::Approx(0.18444698661672027).epsilon(1e-13));

	// the diagonal keeps only the summed route, with the decay-type constant
	auto cdiag = constants(Exponents::make(2.5, 2.5));
	CHECK_FALSE(cdiag.C_upper.has_value());
	CHECK(cdiag.C_sum == Catch::Approx(35795.61747536829).epsilon(1e-12));
	CHECK(cdiag.sum_route == "A1+A2+A3");

	CHECK_THROWS_AS(alpha_const(3.0, 2.0), std::invalid_argument);
	CHECK_THROWS_AS(beta_const(2.0, 3.0), std::invalid_argument);
	CHECK_THROWS_AS(bold_beta_const(2.0, 3.0), std::invalid_argument);
	// r > q holds automatically throughout q < p, so the chain factor is always finite there
	const double bb = bold_beta_const(2.0, 1.9);
	CHECK(std::isfinite(bb));
	CHECK(bb > 0.0);
}

TEST_CASE("first sup functional peaks at the unit square center", "[functionals]") {
	auto e = Exponents::make(2.0, 2.0);
	auto f = unit_square_fields(64, e);
	auto a1 = a_functional(AFunc::A1, f, e);
	CHECK(a1.value == Catch::Approx(0.25).margin(1e-4));
	REQUIRE(a1.has_witness);
	CHECK(a1.witness[0] == Catch::Approx(0.5).margin(0.02));
	CHECK(a1.witness[1] == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("homogeneous weight pair yields unit sup stable under widening", "[functionals]") {
	auto e = Exponents::make(2.0, 2.0);
	auto v = Weight<2>::power(1.0, {0.0, 0.0});
	auto w = Weight<2>::power(1.0, {-2.0, -2.0});
	double prev = 0.0;
	for (double span : {1e3, 1e4}) {
		auto g = Grid<2>::log_uniform(1.0 / span, span, 256);
		auto f = ConfigFields::make(v, w, g, e);
		const double a1 = a_functional(AFunc::A1, f, e).value;
		CHECK(a1 == Catch::Approx(1.0).margin(5e-3));
		if (prev != 0.0) CHECK(std::fabs(a1 - prev) < 2e-3);
		prev = a1;
	}
}

TEST_CASE("vanishing weights zero every functional", "[functionals]") {
	auto e = Exponents::make(3.0, 2.0);
	auto g = Grid<2>::log_uniform(0.01, 100.0, 16);
	CellField<2> sig(g, 1.0), wz(g, 0.0);
	auto f = ConfigFields::from_cells(sig, wz);
	CHECK(a_functional(AFunc::A1, f, e).value == 0.0);
	CHECK(a_functional(AFunc::A2, f, e).value == 0.0);
	CHECK(a_functional(AFunc::A3, f, e).value == 0.0);
	CHECK(b_functional(BFunc::B1, f, e).value == 0.0);
	CHECK(b_functional(BFunc::B2, f, e).value == 0.0);
	CHECK(b_functional(BFunc::B3, f, e).value == 0.0);
	CHECK(bv_functional(BvFunc::Bv, f, e).value == 0.0);

	auto fz = ConfigFields::from_cells(wz, sig);  // sigma = 0 instead
	CHECK(bv_functional(BvFunc::Bv, fz, e).value == 0.0);
	CHECK(bv_functional(BvFunc::Bw, fz, e).value == 0.0);
}

TEST_CASE("first product functional agrees across its three forms", "[functionals]") {
	auto e = Exponents::make(3.0, 2.0);
	auto f = unit_square_fields(32, e);
	const double r = e.r;
	auto phi_field = f.sigma_pre;
	auto psi_field = f.w_suf;
	for (std::int64_t k = 0; k < phi_field.size(); ++k) {
		phi_field[k] = pow0(phi_field[k], r / e.p_conj);
		psi_field[k] = pow0(psi_field[k], r / e.q);
	}
	const double f1 = stieltjes_form1(phi_field, psi_field);
	const double f2 = stieltjes_box_integral(phi_field, psi_field);
	const double f3 = stieltjes_form3(phi_field, psi_field);
	const double scale = std::max({std::fabs(f1), std::fabs(f2), std::fabs(f3)});
	CHECK(std::fabs(f1 - f2) / scale < 1e-12);
	CHECK(std::fabs(f1 - f3) / scale < 1e-12);
	const double ft = stieltjes_box_integral_trapezoid(phi_field, psi_field);
	CHECK(b_functional(BFunc::B1, f, e).value == Catch::Approx(std::pow(ft, 1.0 / r)).epsilon(1e-13));
	// the trapezoid pairing keeps the exact transpose identity as well
	CHECK(ft == Catch::Approx(stieltjes_box_integral_trapezoid(psi_field, phi_field)).epsilon(1e-12));
}

TEST_CASE("running-sum cumulations match quadruple-loop brute force", "[functionals]") {
	auto e = Exponents::make(3.0, 2.0);
	Rng rng(2024);
	auto g = Grid<2>::log_uniform(0.1, 10.0, 8);
	CellField<2> sig(g), w(g);
	for (std::int64_t k = 0; k < sig.size(); ++k) {
		sig[k] = rng.uniform(0.1, 2.0);
		w[k] = rng.uniform(0.1, 2.0);
	}
	auto f = ConfigFields::from_cells(sig, w);
	BruteCumulations brute(sig, w);
	for (int i = 0; i <= 8; ++i)
		for (int j = 0; j <= 8; ++j) {
			CHECK(f.sigma_pre.at({i, j}) == Catch::Approx(brute.sig_pre[i][j]).margin(1e-12));
			CHECK(f.w_suf.at({i, j}) == Catch::Approx(brute.w_suf[i][j]).margin(1e-12));
		}

	// product functional value rebuilt from the brute-force fields
	const double r = e.r;
	Accum acc;
	for (int i = 0; i < 8; ++i)
		for (int j = 0; j < 8; ++j) {
			const double phi = 0.25 * (pow0(brute.sig_pre[i][j], r / e.p_conj) +
			                           pow0(brute.sig_pre[i + 1][j], r / e.p_conj) +
			                           pow0(brute.sig_pre[i][j + 1], r / e.p_conj) +
			                           pow0(brute.sig_pre[i + 1][j + 1], r / e.p_conj));
			const double d2 = pow0(brute.w_suf[i + 1][j + 1], r / e.q) -
			                  pow0(brute.w_suf[i + 1][j], r / e.q) -
			                  pow0(brute.w_suf[i][j + 1], r / e.q) + pow0(brute.w_suf[i][j], r / e.q);
			acc.add(phi * d2);
		}
	const double b1_brute = std::pow(std::max(0.0, acc.value()), 1.0 / r);
	CHECK(b_functional(BFunc::B1, f, e).value == Catch::Approx(b1_brute).epsilon(1e-12));
}

TEST_CASE("sigma-weighted reduction matches overlap-volume brute force", "[functionals]") {
	auto e = Exponents::make(3.0, 2.0);
	auto g = Grid<2>::linear_uniform(1e-9, 1.0, 8);
	auto v = Weight<2>::power(1.0, {0.0, 0.0});
	auto wt = Weight<2>::power(1.0, {0.0, 0.0});
	auto f = ConfigFields::make(v, wt, g, e);

	// inner density at cell centers, then its suffix integral evaluated at each
	// cell center by clipped-overlap volumes
	const int M = 8;
	CellField<2> inner(g);
	for (int i = 0; i < M; ++i)
		for (int j = 0; j < M; ++j)
			inner.at({i, j}) = pow0(f.sigma_pre_mid.at({i, j}), e.q - 1.0) * f.w.at({i, j});
	Accum total;
	for (int a = 0; a < M; ++a)
		for (int b = 0; b < M; ++b) {
			const double cx = g->mid(0, a), cy = g->mid(1, b);
			Accum k;
			for (int i = 0; i < M; ++i)
				for (int j = 0; j < M; ++j) {
					const double ox = std::max(0.0, g->node(0, i + 1) - std::max(g->node(0, i), cx));
					const double oy = std::max(0.0, g->node(1, j + 1) - std::max(g->node(1, j), cy));
					k.add(inner.at({i, j}) * ox * oy);
				}
			total.add(f.sigma.at({a, b}) * pow0(k.value(), e.r / e.q) * g->width(0, a) * g->width(1, b));
		}
	const double bv_brute = std::pow(total.value(), 1.0 / e.r);
	CHECK(bv_functional(BvFunc::Bv, f, e).value == Catch::Approx(bv_brute).epsilon(1e-6));
}

TEST_CASE("weight rescaling shifts every functional by the exact power law", "[functionals]") {
	const double lam = 3.7, mu = 0.23;
	auto g = Grid<2>::log_uniform(0.01, 100.0, 32);

	SECTION("decay ordering") {
		auto e = Exponents::make(2.6, 1.8);
		auto v1 = Weight<2>::power(1.0, {0.4, -0.3});
		auto w1 = Weight<2>::power(1.0, {-1.2, -0.8});
		auto v2 = Weight<2>::power(lam, {0.4, -0.3});
		auto w2 = Weight<2>::power(mu, {-1.2, -0.8});
		auto f1 = ConfigFields::make(v1, w1, g, e);
		auto f2 = ConfigFields::make(v2, w2, g, e);
		const double factor = std::pow(lam, -1.0 / e.p) * std::pow(mu, 1.0 / e.q);
		for (auto which : {AFunc::A1, AFunc::A2, AFunc::A3}) {
			auto x1 = a_functional(which, f1, e), x2 = a_functional(which, f2, e);
			CHECK(x2.value == Catch::Approx(x1.value * factor).epsilon(1e-10));
			CHECK(x2.witness_node == x1.witness_node);
		}
		for (auto which : {BFunc::B1, BFunc::B2, BFunc::B3}) {
			auto x1 = b_functional(which, f1, e), x2 = b_functional(which, f2, e);
			CHECK(x2.value == Catch::Approx(x1.value * factor).epsilon(1e-10));
		}
		for (auto which : {BvFunc::Bv, BvFunc::Bw}) {
			auto x1 = bv_functional(which, f1, e), x2 = bv_functional(which, f2, e);
			CHECK(x2.value == Catch::Approx(x1.value * factor).epsilon(1e-10));
		}
	}
	SECTION("growth ordering") {
		auto e = Exponents::make(1.7, 2.4);
		auto v1 = Weight<2>::power(1.0, {0.9, 0.1});
		auto w1 = Weight<2>::power(1.0, {-1.5, -1.1});
		auto v2 = Weight<2>::power(lam, {0.9, 0.1});
		auto w2 = Weight<2>::power(mu, {-1.5, -1.1});
		auto f1 = ConfigFields::make(v1, w1, g, e);
		auto f2 = ConfigFields::make(v2, w2, g, e);
		const double factor = std::pow(lam, -1.0 / e.p) * std::pow(mu, 1.0 / e.q);
		for (auto which : {AFunc::A1, AFunc::A2, AFunc::A3}) {
			auto x1 = a_functional(which, f1, e), x2 = a_functional(which, f2, e);
			CHECK(x2.value == Catch::Approx(x1.value * factor).epsilon(1e-10));
			CHECK(x2.witness_node == x1.witness_node);
		}
	}
}

TEST_CASE("sup functionals never shrink when nodes are added", "[functionals]") {
	// same piecewise-constant weights on a nested pair of grids: the coarse
	// node set embeds into the fine one, so each sup runs over a superset
	Rng rng(606);
	auto e = Exponents::make(2.0, 2.5);
	auto gc = Grid<2>::log_uniform(0.1, 10.0, 12);
	auto gf = Grid<2>::log_uniform(0.1, 10.0, 24);
	CellField<2> sig_c(gc), w_c(gc), sig_f(gf), w_f(gf);
	for (int i = 0; i < 12; ++i)
		for (int j = 0; j < 12; ++j) {
			sig_c.at({i, j}) = rng.uniform(0.1, 3.0);
			w_c.at({i, j}) = rng.uniform(0.1, 3.0);
		}
	for (int i = 0; i < 24; ++i)
		for (int j = 0; j < 24; ++j) {
			sig_f.at({i, j}) = sig_c.at({i / 2, j / 2});
			w_f.at({i, j}) = w_c.at({i / 2, j / 2});
		}
	auto fc = ConfigFields::from_cells(sig_c, w_c);
	auto ff = ConfigFields::from_cells(sig_f, w_f);
	for (auto which : {AFunc::A1, AFunc::A2, AFunc::A3}) {
		const double coarse = a_functional(which, fc, e).value;
		const double fine = a_functional(which, ff, e).value;
		CHECK(fine >= coarse * (1.0 - 1e-12));
	}
}

TEST_CASE("chained bounds hold on random power-weight draws", "[functionals]") {
	Rng rng(13579);
	auto g = Grid<2>::log_uniform(0.05, 20.0, 24);
	int growth_seen = 0, zone1_seen = 0;
	for (int trial = 0; trial < 100; ++trial) {
		const double av = rng.uniform(-0.9, 2.0), bv = rng.uniform(-0.9, 2.0);
		const double aw = rng.uniform(-0.9, 2.0), bw = rng.uniform(-0.9, 2.0);
		auto v = Weight<2>::power(rng.uniform(0.3, 3.0), {av, bv});
		auto w = Weight<2>::power(rng.uniform(0.3, 3.0), {aw, bw});
		double p = rng.uniform(1.4, 4.0), q = rng.uniform(1.4, 4.0);
		if (std::fabs(p - q) < 0.4) q += (q >= p ? 0.4 : -0.4);
		auto e = Exponents::make(p, q);
		auto f = ConfigFields::make(v, w, g, e);
		auto rep = zone_chain(f, e);
		for (const auto& entry : rep.entries) {
			INFO(entry.label << " p=" << p << " q=" << q << " lhs=" << entry.lhs
			                 << " bound=" << entry.bound);
			CHECK(entry.holds(1e-10));
		}
		if (e.zone == Zone::PLessQ) {
			REQUIRE(rep.entries.size() == 2);
			++growth_seen;
		}
		if (e.zone == Zone::QLessP && rep.b_zone == 1) {
			REQUIRE(rep.entries.size() == 2);
			++zone1_seen;
		}
	}
	CHECK(growth_seen > 10);
	CHECK(zone1_seen > 10);
}

TEST_CASE("chain constants reduce to the documented examples", "[functionals]") {
	// alpha(2,3)^(1/3) = 2, so the second-to-first chain reads A2 <= 2 A1
	auto e = Exponents::make(2.0, 3.0);
	auto f = unit_square_fields(32, e);
	auto rep = zone_chain(f, e);
	REQUIRE(rep.entries.size() == 2);
	const double a1 = a_functional(AFunc::A1, f, e).value;
	CHECK(rep.entries[0].bound == Catch::Approx(2.0 * a1).epsilon(1e-12));
	CHECK(rep.entries[0].holds());
	CHECK(rep.entries[1].holds());

	auto e2 = Exponents::make(3.0, 2.0);
	auto f2 = unit_square_fields(32, e2);
	auto rep2 = zone_chain(f2, e2);
	REQUIRE(rep2.b_zone == 1);
	REQUIRE(rep2.entries.size() == 2);
	CHECK(rep2.entries[0].holds());
	CHECK(rep2.entries[1].holds());
}

TEST_CASE("functional families enforce their zone preconditions", "[functionals]") {
	auto e = Exponents::make(2.0, 3.0);
	auto f = unit_square_fields(8, e);
	CHECK_THROWS_AS(b_functional(BFunc::B1, f, e), std::invalid_argument);
	CHECK_THROWS_AS(bv_functional(BvFunc::Bv, f, e), std::invalid_argument);
}
