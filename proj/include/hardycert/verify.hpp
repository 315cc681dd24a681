// Self-contained machine checks of the auxiliary results the certification
// rests on: the geometric-weight tail inequality for sequences, the localized
// box bounds for the two cumulation families, the collapse of the decay-side
// functionals onto the diagonal ones as q approaches p, and the sub-zone
// classification of the q < p regime.
//
// Every check reports the minimum of RHS - LHS over its instances; a report
// passes when that minimum clears -1e-10 (compensated sums still carry
// reassociation error, so exact-equality cases may land a few ulp below zero).
// The inequality checks divide each margin by max(1, RHS): instance scales
// vary over dozens of orders of magnitude, and only a relative margin makes a
// fixed rounding slack meaningful across all of them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hardycert/functionals.hpp"

namespace hardycert {

inline constexpr double kMarginSlack = 1e-10;

struct CheckReport {
	std::string check_name;
	long long instances_run = 0;
	double worst_margin = std::numeric_limits<double>::infinity();  // min of RHS - LHS
	std::string failing_instance;  // worst instance, serialized; empty when none fails
	std::string note;              // free-form summary diagnostics
	bool passed() const { return worst_margin >= -kMarginSlack; }
};

namespace detail {

// Running min with lazy serialization: the description is built only when the
// instance becomes the new worst, and kept as a failure record only if the
// final minimum breaches the slack.
struct MarginTracker {
	double worst = std::numeric_limits<double>::infinity();
	std::string worst_desc;

	template <typename Describe>
	void add(double margin, Describe&& describe) {
		if (!std::isfinite(margin)) throw std::domain_error("check: non-finite margin");
		if (margin < worst) {
			worst = margin;
			worst_desc = describe();
		}
	}
	void finish(CheckReport& rep) const {
		rep.worst_margin = worst;
		if (worst < -kMarginSlack) rep.failing_instance = worst_desc;
	}
};

// log(b^x - 1) for b > 1, x > 0, stable when b^x overflows or is close to 1.
inline double log_pow_m1(double b, double x) {
	const double t = x * std::log(b);
	return t > 36.0 ? t + std::log1p(-std::exp(-t)) : std::log(std::expm1(t));
}

}  // namespace detail

// Sharp constant of the suffix-sum branch (geometric factors growing at ratio
// rho > 1): rho^gamma/(rho^gamma - 1) up to gamma = 1, the Hoelder-degraded
// form beyond.
inline double ghs_constant_growing(double gamma, double rho) {
	if (gamma <= 1.0) return 1.0 / (-std::expm1(-gamma * std::log(rho)));
	return std::exp(gamma * std::log(rho) - (gamma - 1.0) * detail::log_pow_m1(rho, 1.0 / (gamma - 1.0)) -
	                detail::log_pow_m1(rho, gamma - 1.0));
}

// Prefix-sum branch (factors decaying at ratio tau < 1): the same shape in
// 1/tau.
inline double ghs_constant_decaying(double gamma, double tau) {
	if (gamma <= 1.0) return 1.0 / (-std::expm1(gamma * std::log(tau)));
	const double b = 1.0 / tau;
	return std::exp(gamma * std::log(b) - (gamma - 1.0) * detail::log_pow_m1(b, 1.0 / (gamma - 1.0)) -
	                detail::log_pow_m1(b, gamma - 1.0));
}

struct GhsSides {
	double lhs = 0.0, rhs = 0.0;
	double margin() const { return rhs - lhs; }
};

// Both sides of the weighted tail inequality for one nonnegative sequence a
// supported on indices [-K, K] (a[K + m] holds entry m), against the exact
// geometric factor ratio^k. ratio > 1 selects the suffix-sum branch, ratio in
// (0, 1) the prefix-sum branch. Outside the window the inner sum is constant,
// so the remaining infinite tail of the left side is closed in exact geometric
// form; equality cases therefore reproduce to rounding.
inline GhsSides ghs_sides(double gamma, double ratio, const std::vector<double>& a, int K) {
	if (!(gamma > 0.0) || !std::isfinite(gamma))
		throw std::invalid_argument("ghs: gamma must be positive and finite");
	if (!(ratio > 0.0) || ratio == 1.0 || !std::isfinite(ratio))
		throw std::invalid_argument("ghs: ratio must lie in (0,1) or (1,inf)");
	if (K < 0 || K > 64) throw std::invalid_argument("ghs: window half-width must lie in [0, 64]");
	if (a.size() != std::size_t(2 * K + 1)) throw std::invalid_argument("ghs: sequence must have 2K+1 entries");
	for (double x : a)
		if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("ghs: entries must be finite and nonnegative");

	const int n = 2 * K + 1;
	const double u = std::pow(ratio, gamma);
	const bool growing = ratio > 1.0;

	// inner sums: suffix for the growing branch, prefix for the decaying one
	std::vector<double> inner(a.size());
	{
		Accum run;
		if (growing)
			for (int i = n - 1; i >= 0; --i) {
				run.add(a[std::size_t(i)]);
				inner[std::size_t(i)] = run.value();
			}
		else
			for (int i = 0; i < n; ++i) {
				run.add(a[std::size_t(i)]);
				inner[std::size_t(i)] = run.value();
			}
	}
	const double total = growing ? inner.front() : inner.back();

	Accum lhs, rhs_sum;
	double uk = std::pow(u, double(-K));
	for (int i = 0; i < n; ++i) {
		if (inner[std::size_t(i)] > 0.0) lhs.add(std::pow(inner[std::size_t(i)], gamma) * uk);
		const double am = a[std::size_t(i)];
		if (am > 0.0) rhs_sum.add(std::pow(am, gamma) * uk);
		uk *= u;
	}

	GhsSides out;
	if (growing) {
		// indices below -K all see the full mass; sum of u^k over k < -K
		if (total > 0.0) lhs.add(std::pow(total, gamma) * std::pow(u, double(-K)) / (u - 1.0));
		out.rhs = ghs_constant_growing(gamma, ratio) * rhs_sum.value();
	} else {
		// indices above K all see the full mass; sum of u^k over k > K
		if (total > 0.0) lhs.add(std::pow(total, gamma) * std::pow(u, double(K)) * u / (1.0 - u));
		out.rhs = ghs_constant_decaying(gamma, ratio) * rhs_sum.value();
	}
	out.lhs = lhs.value();
	if (!std::isfinite(out.lhs) || !std::isfinite(out.rhs))
		throw std::domain_error("ghs: sides overflow for these parameters");
	return out;
}

// Random-instance driver: `trials` nonnegative sequences (roughly 30% sparse)
// on windows of varying half-width, all against the same gamma and ratio.
inline CheckReport check_ghs(double gamma, double rho_or_tau, int trials, std::uint64_t seed) {
	if (!(gamma > 0.0) || !std::isfinite(gamma))
		throw std::invalid_argument("check_ghs: gamma must be positive and finite");
	if (!(rho_or_tau > 0.0) || rho_or_tau == 1.0 || !std::isfinite(rho_or_tau))
		throw std::invalid_argument("check_ghs: ratio must lie in (0,1) or (1,inf)");
	if (trials < 1) throw std::invalid_argument("check_ghs: need at least one trial");

	CheckReport rep;
	rep.check_name = "ghs";
	detail::MarginTracker track;
	for (int t = 0; t < trials; ++t) {
		Rng rng(derive_seed(seed, std::uint64_t(t)));
		const int K = 16 + int(rng.next_below(49));
		std::vector<double> a(std::size_t(2 * K + 1));
		for (double& x : a) {
			const bool zero = rng.next_double() < 0.3;
			x = zero ? 0.0 : rng.next_double();
		}
		const GhsSides s = ghs_sides(gamma, rho_or_tau, a, K);
		// at gamma = 1 exchanging the two sums turns the bound into an identity
		// for every sequence, so raw margins there are rounding noise at the
		// instance's scale, which the K-th power of the ratio pushes past 1e19
		track.add(s.margin() / std::max(1.0, s.rhs), [&] {
			return "trial=" + std::to_string(t) + " K=" + std::to_string(K) + " gamma=" + fmt17(gamma) +
			       " ratio=" + fmt17(rho_or_tau) + " lhs=" + fmt17(s.lhs) + " rhs=" + fmt17(s.rhs);
		});
	}
	rep.instances_run = trials;
	track.finish(rep);
	return rep;
}

// The two localized box bounds: Forward integrates w against the q-th power
// of the box-relative prefix cumulation of sigma and is controlled by the
// box's sigma mass; Adjoint integrates sigma against the p'-th power of the
// box-relative suffix cumulation of w and is controlled by the box's w mass.
enum class BoxCase { Forward, Adjoint };

inline const char* box_case_name(BoxCase c) { return c == BoxCase::Forward ? "forward" : "adjoint"; }

// Node-index ranges: the box spans cells [i0, i1) x [j0, j1).
struct GridBox {
	int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

	void validate(const Grid<2>& g) const {
		if (!(0 <= i0 && i0 < i1 && i1 <= g.cells(0) && 0 <= j0 && j0 < j1 && j1 <= g.cells(1)))
			throw std::invalid_argument("box: degenerate or out of range");
	}
	std::string describe() const {
		return "[" + std::to_string(i0) + "," + std::to_string(i1) + ")x[" + std::to_string(j0) + "," +
		       std::to_string(j1) + ")";
	}
};

// Per-configuration data the box right-hand sides reuse: the full-truncation
// sup functional for the growth zone, and the normalized powers of the global
// cumulations for the decay zone's masked pairing.
struct BoxRhsData {
	double a1 = 0.0;
	NodeField<2> phi, psi;
	double sp = 1.0, sw = 1.0;
};

inline BoxRhsData make_box_rhs_data(const ConfigFields& f, const Exponents& e) {
	BoxRhsData d;
	if (e.zone == Zone::PLessQ) {
		d.a1 = a_functional(AFunc::A1, f, e).value;
	} else if (e.zone == Zone::QLessP) {
		d.sp = detail::max_value(f.sigma_pre);
		d.sw = detail::max_value(f.w_suf);
		d.phi = detail::node_transform(f.sigma_pre,
		                               [&](double x) { return pow0(x / d.sp, e.r / e.p_conj); });
		d.psi = detail::node_transform(f.w_suf, [&](double x) { return pow0(x / d.sw, e.r / e.q); });
	} else {
		throw std::invalid_argument("box check: needs p != q");
	}
	return d;
}

struct BoxSides {
	GridBox box;
	double lhs = 0.0, rhs = 0.0;
	double margin() const { return rhs - lhs; }
};

// Evaluates one box. The left side rebuilds the cumulation from scratch on
// the sub-grid (box-relative, not a slice of the global field); the right
// side uses the zone's constant with either the global sup functional or the
// support-masked pairing of the global cumulation powers restricted to the
// box's cells.
inline BoxSides lemma_box_sides(BoxCase which, const ConfigFields& f, const Exponents& e,
                                const BoxRhsData& d, const GridBox& box) {
	box.validate(*f.grid);
	BoxSides out;
	out.box = box;

	std::array<std::vector<double>, 2> axes;
	axes[0].assign(f.grid->axis(0).begin() + box.i0, f.grid->axis(0).begin() + box.i1 + 1);
	axes[1].assign(f.grid->axis(1).begin() + box.j0, f.grid->axis(1).begin() + box.j1 + 1);
	auto gsub = std::make_shared<const Grid<2>>(std::move(axes));
	CellField<2> inner_sub(gsub), outer_sub(gsub);
	const bool fwd = which == BoxCase::Forward;
	for (int i = box.i0; i < box.i1; ++i)
		for (int j = box.j0; j < box.j1; ++j) {
			inner_sub.at({i - box.i0, j - box.j0}) = fwd ? f.sigma.at({i, j}) : f.w.at({i, j});
			outer_sub.at({i - box.i0, j - box.j0}) = fwd ? f.w.at({i, j}) : f.sigma.at({i, j});
		}
	const auto cum = cell_center_values(fwd ? prefix_cumulate(inner_sub) : suffix_cumulate(inner_sub));

	const double outer_exp = fwd ? e.q : e.p_conj;
	Accum lhs, mass;
	for (int i = 0; i < gsub->cells(0); ++i)
		for (int j = 0; j < gsub->cells(1); ++j) {
			const double vol = gsub->width(0, i) * gsub->width(1, j);
			mass.add(inner_sub.at({i, j}) * vol);
			const double outer = outer_sub.at({i, j}), c = cum.at({i, j});
			if (outer > 0.0 && c > 0.0) lhs.add(outer * std::pow(c, outer_exp) * vol);
		}
	out.lhs = lhs.value();

	const double m = std::max(0.0, mass.value());
	if (e.zone == Zone::PLessQ) {
		out.rhs = fwd ? alpha_const(e.p, e.q) * pow0(m, e.q / e.p) * std::pow(d.a1, e.q)
		              : alpha_const(e.q_conj, e.p_conj) * pow0(m, e.p_conj / e.q_conj) *
		                    std::pow(d.a1, e.p_conj);
	} else {
		// masked pairing over the box's cells: corner mean of phi against the
		// mixed second difference of psi, cells off the mask contribute nothing
		const std::int64_t s0 = d.phi.layout().strides[0];
		const double* fp = d.phi.data().data();
		const double* pp = d.psi.data().data();
		Accum br;
		for (int i = box.i0; i < box.i1; ++i)
			for (int j = box.j0; j < box.j1; ++j) {
				const double support = fwd ? f.w.at({i, j}) : f.sigma.at({i, j});
				if (support <= 0.0) continue;
				const std::int64_t k = i * s0 + j;
				const double d2 = (pp[k + s0 + 1] - pp[k + 1]) - (pp[k + s0] - pp[k]);
				br.add(0.25 * (fp[k] + fp[k + 1] + fp[k + s0] + fp[k + s0 + 1]) * d2);
			}
		const double X = std::max(0.0, br.value());
		out.rhs = fwd ? beta_const(e.p, e.q) * pow0(m, e.q / e.p) * std::pow(d.sp, e.q / e.p_conj) *
		                    d.sw * pow0(X, e.q / e.r)
		              : beta_const(e.q_conj, e.p_conj) * pow0(m, e.p_conj / e.q_conj) * d.sp *
		                    std::pow(d.sw, e.p_conj / e.q) * pow0(X, e.p_conj / e.r);
	}
	if (!std::isfinite(out.lhs) || !std::isfinite(out.rhs))
		throw std::domain_error("box check: non-finite side");
	return out;
}

// Margins shrink toward zero when the box grows to the full truncation while
// w concentrates near the upper corner (the localized bound is tight in that
// direction); random draws stay comfortably positive.
inline CheckReport check_lemma_boxes(BoxCase which, const Weight<2>& v, const Weight<2>& w,
                                     const Exponents& e, const GridPtr<2>& g, int boxes,
                                     std::uint64_t seed) {
	if (boxes < 1) throw std::invalid_argument("check_lemma_boxes: need at least one box");
	const ConfigFields f = ConfigFields::make(v, w, g, e);
	const BoxRhsData d = make_box_rhs_data(f, e);

	CheckReport rep;
	rep.check_name = std::string("boxes.") + box_case_name(which);
	detail::MarginTracker track;
	const int m0 = g->cells(0), m1 = g->cells(1);
	for (int t = 0; t < boxes; ++t) {
		Rng rng(derive_seed(seed, std::uint64_t(t)));
		GridBox box;
		box.i0 = int(rng.next_below(std::uint64_t(m0)));
		box.i1 = box.i0 + 1 + int(rng.next_below(std::uint64_t(m0 - box.i0)));
		box.j0 = int(rng.next_below(std::uint64_t(m1)));
		box.j1 = box.j0 + 1 + int(rng.next_below(std::uint64_t(m1 - box.j0)));
		const BoxSides s = lemma_box_sides(which, f, e, d, box);
		track.add(s.margin() / std::max(1.0, s.rhs), [&] {
			return "box=" + s.box.describe() + " lhs=" + fmt17(s.lhs) + " rhs=" + fmt17(s.rhs);
		});
	}
	rep.instances_run = boxes;
	rep.note = std::string(zone_name(e.zone)) + " route";
	track.finish(rep);
	return rep;
}

// |B_i(p, p - delta) - A_i(p, p)| for one delta, all three pairs.
inline std::array<double, 3> limit_gaps(const Weight<2>& v, const Weight<2>& w, const GridPtr<2>& g,
                                        double p, double delta) {
	if (!(delta > 0.0) || !(p - delta > 1.0))
		throw std::invalid_argument("limit check: need 0 < delta < p - 1");
	const Exponents ep = Exponents::make(p, p);
	const Exponents ed = Exponents::make(p, p - delta);
	const ConfigFields fp = ConfigFields::make(v, w, g, ep);
	const ConfigFields fd = ConfigFields::make(v, w, g, ed);
	std::array<double, 3> gaps{};
	const AFunc af[3] = {AFunc::A1, AFunc::A2, AFunc::A3};
	const BFunc bf[3] = {BFunc::B1, BFunc::B2, BFunc::B3};
	for (int i = 0; i < 3; ++i)
		gaps[std::size_t(i)] =
		    std::fabs(b_functional(bf[i], fd, ed).value - a_functional(af[i], fp, ep).value);
	return gaps;
}

// Asserts that the gap to the diagonal functional shrinks as delta does, for
// each of the three functional pairs: margins are consecutive differences
// gap(delta_k) - gap(delta_{k+1}) over the given decreasing deltas.
inline CheckReport check_limit_AB(const Weight<2>& v, const Weight<2>& w, const GridPtr<2>& g,
                                  double p, const std::vector<double>& deltas) {
	if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("check_limit_AB: p must exceed 1");
	if (deltas.size() < 2) throw std::invalid_argument("check_limit_AB: need at least two deltas");
	for (std::size_t k = 0; k < deltas.size(); ++k) {
		if (!(deltas[k] > 0.0) || !(p - deltas[k] > 1.0))
			throw std::invalid_argument("check_limit_AB: need 0 < delta < p - 1");
		if (k > 0 && !(deltas[k] < deltas[k - 1]))
			throw std::invalid_argument("check_limit_AB: deltas must strictly decrease");
	}

	std::vector<std::array<double, 3>> gaps;
	gaps.reserve(deltas.size());
	for (double d : deltas) gaps.push_back(limit_gaps(v, w, g, p, d));

	CheckReport rep;
	rep.check_name = "limit_AB";
	detail::MarginTracker track;
	for (std::size_t k = 0; k + 1 < gaps.size(); ++k)
		for (int i = 0; i < 3; ++i) {
			const double m = gaps[k][std::size_t(i)] - gaps[k + 1][std::size_t(i)];
			track.add(m, [&] {
				return "pair=" + std::to_string(i + 1) + " deltas=(" + fmt17(deltas[k]) + "," +
				       fmt17(deltas[k + 1]) + ") gaps=(" + fmt17(gaps[k][std::size_t(i)]) + "," +
				       fmt17(gaps[k + 1][std::size_t(i)]) + ")";
			});
		}
	rep.instances_run = 3 * (static_cast<long long>(deltas.size()) - 1);
	for (int i = 0; i < 3; ++i) {
		const double first = gaps.front()[std::size_t(i)], last = gaps.back()[std::size_t(i)];
		rep.note += (i ? " " : "") + std::string("ratio") + std::to_string(i + 1) + "=" +
		            (last > 0.0 ? fmt17(first / last) : "inf(gap=0)");
	}
	track.finish(rep);
	return rep;
}

// Exhaustive consistency scan of the q < p sub-zone classification: on a
// 0.05-step lattice with 1.05 <= q < p <= 6 (and on the supplied pair), each
// point must fall in exactly one sub-zone, the index r must satisfy its
// defining relation, and in the doubly-subcritical sub-zone (r/p < 1 and
// r/q' < 1) the recorded maximum of r stays bounded.
inline CheckReport check_zones(const Exponents& e) {
	if (e.zone != Zone::QLessP) throw std::invalid_argument("check_zones: needs q < p");

	CheckReport rep;
	rep.check_name = "zones";
	detail::MarginTracker track;
	long long count = 0;
	double max_r4 = 0.0;
	std::array<long long, 4> per_zone{};

	// `zone` is the independently computed classification; on1/on2 flag points
	// sitting exactly on a predicate boundary, where the floating-point route
	// may legitimately round to the adjacent sub-zone (its boundary twin)
	auto score = [&](double p, double q, int zone, bool on1, bool on2) {
		const Exponents x = Exponents::make(p, q);
		const int reported = b_zone_index(x);
		auto flip1 = [](int z) { return z == 1 ? 3 : z == 2 ? 4 : z == 3 ? 1 : 2; };
		auto flip2 = [](int z) { return z == 1 ? 2 : z == 2 ? 1 : z == 3 ? 4 : 3; };
		const bool ok = reported == zone || (on1 && reported == flip1(zone)) ||
		                (on2 && reported == flip2(zone)) ||
		                (on1 && on2 && reported == flip1(flip2(zone)));
		const double r = p * q / (p - q);
		const double rel = std::fabs(x.r - r) / r;
		double margin = std::min(kMarginSlack - rel, ok ? 1.0 : -1.0);
		if (zone == 4) {
			max_r4 = std::max(max_r4, r);
			margin = std::min(margin, 100.0 - r);  // r < p <= 6 there by definition
		}
		++per_zone[std::size_t(zone - 1)];
		++count;
		track.add(margin, [&] {
			return "p=" + fmt17(p) + " q=" + fmt17(q) + " zone=" + std::to_string(zone) +
			       " reported=" + std::to_string(reported);
		});
	};

	{
		// supplied pair: no exact arithmetic to lean on, so recompute with the
		// product form of r and forgive only near-boundary disagreement
		const double r = e.p * e.q / (e.p - e.q);
		const double qc = e.q / (e.q - 1.0);
		const bool f1 = r / e.p >= 1.0, f2 = r / qc >= 1.0;
		score(e.p, e.q, f1 ? (f2 ? 1 : 2) : (f2 ? 3 : 4),
		      std::fabs(r / e.p - 1.0) <= 1e-12, std::fabs(r / qc - 1.0) <= 1e-12);
	}
	// lattice points are multiples of 1/20, so both predicates reduce to exact
	// integer comparisons: r/p >= 1 iff 2q >= p, and r/q' >= 1 iff
	// q(p + 1) >= 2p; equality picks out genuine boundary points (such as
	// p = 3.6, q = 1.8, where r/p = 1 exactly)
	for (int qi = 21; qi <= 119; ++qi)
		for (int pi = qi + 1; pi <= 120; ++pi) {
			const bool f1 = 2 * qi >= pi, f2 = qi * (pi + 20) >= 40 * pi;
			score(double(pi) * 0.05, double(qi) * 0.05, f1 ? (f2 ? 1 : 2) : (f2 ? 3 : 4),
			      2 * qi == pi, qi * (pi + 20) == 40 * pi);
		}

	rep.instances_run = count;
	rep.note = "sub-zones 1/2/3/4: " + std::to_string(per_zone[0]) + "/" + std::to_string(per_zone[1]) +
	           "/" + std::to_string(per_zone[2]) + "/" + std::to_string(per_zone[3]) +
	           "; max r in the doubly-subcritical sub-zone: " + fmt17(max_r4);
	track.finish(rep);
	return rep;
}

// Random positive power weights for stress instances: w's exponents are drawn
// directly, v's are drawn through its dual transform so that both w and the
// dual weight stay integrable near the origin (exponents in (-0.9, 2)).
struct RandomWeightPair {
	Weight<2> v, w;
};

inline RandomWeightPair draw_power_pair(Rng& rng, const Exponents& e) {
	const double s = 1.0 - e.p;  // inverse of the dual transform's exponent map
	const double cs = rng.uniform(0.25, 4.0);
	std::array<double, 2> as{rng.uniform(-0.9, 2.0), rng.uniform(-0.9, 2.0)};
	RandomWeightPair out;
	out.v = Weight<2>::power(std::pow(cs, s), {as[0] * s, as[1] * s});
	out.w = Weight<2>::power(rng.uniform(0.25, 4.0), {rng.uniform(-0.9, 2.0), rng.uniform(-0.9, 2.0)});
	return out;
}

}  // namespace hardycert
