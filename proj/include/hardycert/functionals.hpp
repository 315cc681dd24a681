#pragma once
// Scalar boundedness functionals for the two-variable rectangular integration
// operator, evaluated from cumulative fields on a truncation grid, together
// with the explicit multiplicative constants of the certification theorems.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hardycert/cumulate.hpp"
#include "hardycert/exponents.hpp"
#include "hardycert/stieltjes.hpp"
#include "hardycert/weight.hpp"

namespace hardycert {

// x^e with the convention 0^e = 0 for every e (degenerate corners drop out of
// sups and pairings instead of producing inf or nan)
inline double pow0(double x, double e) { return x > 0.0 ? std::pow(x, e) : 0.0; }

// 2^x - 1 evaluated stably for small x
inline double pow2m1(double x) { return std::expm1(x * std::numbers::ln2); }

struct FunctionalValue {
	std::string name;
	double value = 0.0;
	bool has_witness = false;
	std::vector<double> witness;      // grid-node coordinates attaining the sup
	std::vector<int> witness_node;    // the node's multi-index
	double neg_mass_fraction = 0.0;   // |negative| / (|positive| + |negative|) of the outer measure
};

// Sub-classification of the q < p regime by the finiteness pattern of the
// chained bounds: 1: r/p>=1 & r/q'>=1, 2: r/p>=1 & r/q'<1,
// 3: r/p<1 & r/q'>=1, 4: r/p<1 & r/q'<1.
inline int b_zone_index(const Exponents& e) {
	if (e.zone != Zone::QLessP) throw std::invalid_argument("constants: zone index needs q < p");
	if (e.r_over_p_ge1) return e.r_over_qconj_ge1 ? 1 : 2;
	return e.r_over_qconj_ge1 ? 3 : 4;
}

inline double alpha_const(double p, double q) {
	if (!(p < q)) throw std::invalid_argument("constants: alpha needs p < q");
	return p * p * (q - 1.0) / (q - p);
}

inline double beta_const(double p, double q) {
	if (!(q < p)) throw std::invalid_argument("constants: beta needs q < p");
	const double r = 1.0 / (1.0 / q - 1.0 / p);
	double b = std::pow(2.0, q + 1.0) / pow2m1(q / r);
	if (r / p >= 1.0) b *= std::pow(2.0, q / p - q / r);
	return b;
}

inline double bold_beta_const(double p, double q) {
	if (!(q < p)) throw std::invalid_argument("constants: bold beta needs q < p");
	// r = pq/(p-q) > q whenever 1 < q < p, so both bracket factors are positive
	const double r = 1.0 / (1.0 / q - 1.0 / p);
	return std::pow(2.0, 1.0 / q + 1.0) /
	       (std::pow(pow2m1((r - q) / p), 1.0 / r) * std::pow(pow2m1(q / r), 1.0 / p));
}

// upper constant for p < q with lemma constants (a, a2) in place of (alpha, alpha')
inline double upper_const_growth(double a, double a2, const Exponents& e) {
	const double p = e.p, q = e.q;
	const double first = std::pow(2.0 / 3.0, q) *
	                     std::max(a, 2.0 * q * std::pow(e.q_conj, q / e.p_conj)) *
	                     std::pow(std::pow(2.0, p - 1.0) / pow2m1(p - 1.0), q / p);
	const double second = std::pow(3.0, 1.0 / p) * std::pow(a2, 1.0 / e.p_conj) *
	                      std::pow(std::pow(3.0, q - 1.0) / pow2m1((q - 1.0) * std::log2(3.0)), 1.0 / e.q_conj);
	return std::pow(3.0, 3.0 * q) * (first + second);
}

// upper constant for q <= p with lemma constants (b, b2) in place of (beta, beta');
// on the diagonal q = p the factor (q/r)^{q/r} is taken at its r -> inf limit 1
inline double upper_const_decay(double b, double b2, const Exponents& e) {
	const double p = e.p, q = e.q;
	const double qr_pow = e.has_r ? std::pow(q / e.r, q / e.r) : 1.0;
	const double first = std::pow(2.0 / 3.0, q) *
	                     std::max(b, 2.0 * q * std::pow(e.p_conj, q - 1.0) * qr_pow) *
	                     std::pow(std::pow(2.0, p - 1.0) / pow2m1(p - 1.0), q / p);
	const double second = 3.0 * std::pow(b2, 1.0 / e.p_conj) *
	                      std::pow(std::pow(3.0, q - 1.0) / pow2m1((q - 1.0) * std::log2(3.0)), 1.0 / e.q_conj);
	return std::pow(3.0, 3.0 * q) * (first + second);
}

struct ConstantSet {
	Zone zone = Zone::Diagonal;
	double c_lower = 1.0;                    // lower-bound factor on A1 (p<=q) or B1 (q<p)
	std::optional<double> C_upper;           // single-functional theorem constant (absent on the diagonal)
	std::optional<double> alpha, alpha_conj; // p < q only
	std::optional<double> beta, beta_conj;   // q < p only
	std::optional<double> bold_beta_pq;           // chain factor B2 <= bold_beta_pq * B1
	std::optional<double> bold_beta_qconj_pconj;  // chain factor for B3
	double C_sum = 0.0;                      // constant multiplying the summed functionals
	std::string sum_route;                   // which sum C_sum multiplies
	int b_zone = 0;                          // 1..4 for q < p, else 0
};

inline ConstantSet constants(const Exponents& e) {
	ConstantSet c;
	c.zone = e.zone;
	switch (e.zone) {
		case Zone::PLessQ: {
			c.alpha = alpha_const(e.p, e.q);
			c.alpha_conj = alpha_const(e.q_conj, e.p_conj);
			c.C_upper = upper_const_growth(*c.alpha, *c.alpha_conj, e);
			c.c_lower = 1.0;
			c.C_sum = upper_const_growth(1.0, 1.0, e);
			c.sum_route = "A1+A2+A3";
			break;
		}
		case Zone::Diagonal: {
			c.c_lower = 1.0;
			c.C_sum = upper_const_decay(1.0, 1.0, e);
			c.sum_route = "A1+A2+A3";
			break;
		}
		case Zone::QLessP: {
			c.beta = beta_const(e.p, e.q);
			c.beta_conj = beta_const(e.q_conj, e.p_conj);
			c.C_upper = upper_const_decay(*c.beta, *c.beta_conj, e);
			c.c_lower = std::pow(2.0, -1.0 / e.p_conj) * std::pow(e.q / e.r, 1.0 / e.q) *
			            std::pow(e.p_conj / e.r, 1.0 / e.p_conj);
			c.bold_beta_pq = bold_beta_const(e.p, e.q);
			c.bold_beta_qconj_pconj = bold_beta_const(e.q_conj, e.p_conj);
			c.b_zone = b_zone_index(e);
			switch (c.b_zone) {
				case 1:
					c.C_sum = upper_const_decay(1.0, 1.0, e);
					c.sum_route = "B1+B2+B3";
					break;
				case 2:
					c.C_sum = upper_const_decay(1.0, *c.beta_conj, e);
					c.sum_route = "B1+B2";
					break;
				case 3:
					c.C_sum = upper_const_decay(*c.beta, 1.0, e);
					c.sum_route = "B1+B3";
					break;
				default:
					c.C_sum = *c.C_upper;
					c.sum_route = "B1";
					break;
			}
			break;
		}
	}
	return c;
}

// All cumulative fields derived from one (v, w, grid) configuration.
struct ConfigFields {
	GridPtr<2> grid;
	CellField<2> sigma;          // dual weight v^(1-p') at cell midpoints
	CellField<2> w;              // w at cell midpoints
	NodeField<2> sigma_pre;      // running integral of sigma from the origin
	NodeField<2> w_suf;          // running integral of w from infinity
	CellField<2> sigma_pre_mid;  // the same cumulations at cell centers
	CellField<2> w_suf_mid;

	static ConfigFields from_cells(CellField<2> sigma_cells, CellField<2> w_cells) {
		if (!same_grid(sigma_cells.grid(), w_cells.grid()))
			throw std::invalid_argument("fields: sigma and w must share a grid");
		GridPtr<2> g = sigma_cells.grid();
		ConfigFields f{g,
		               std::move(sigma_cells),
		               std::move(w_cells),
		               NodeField<2>(g, Dir::Lower),
		               NodeField<2>(g, Dir::Upper),
		               CellField<2>(g),
		               CellField<2>(g)};
		f.sigma_pre = prefix_cumulate(f.sigma);
		f.w_suf = suffix_cumulate(f.w);
		f.sigma_pre_mid = cell_center_values(f.sigma_pre);
		f.w_suf_mid = cell_center_values(f.w_suf);
		return f;
	}

	static ConfigFields make(const Weight<2>& v, const Weight<2>& wt, const GridPtr<2>& g,
	                         const Exponents& e) {
		return from_cells(sample(dual_weight(v, e), g), sample(wt, g));
	}
};

enum class AFunc { A1, A2, A3 };
enum class BFunc { B1, B2, B3 };
enum class BvFunc { Bv, Bw };

namespace detail {

// sup over grid nodes of a nonnegative node expression; first strict maximum
// in lexicographic node order wins
template <typename F>
FunctionalValue node_sup(const char* name, const GridPtr<2>& g, F&& node_value) {
	FunctionalValue out;
	out.name = name;
	const int n0 = g->cells(0), n1 = g->cells(1);
	double best = 0.0;
	int bi = 0, bj = 0;
	for (int i = 0; i <= n0; ++i)
		for (int j = 0; j <= n1; ++j) {
			const double val = node_value(i, j);
			if (!std::isfinite(val)) throw std::domain_error("functional: non-finite sup candidate");
			if (val > best) {
				best = val;
				bi = i;
				bj = j;
			}
		}
	out.value = best;
	out.has_witness = true;
	out.witness = {g->node(0, bi), g->node(1, bj)};
	out.witness_node = {bi, bj};
	return out;
}

}  // namespace detail

inline FunctionalValue a_functional(AFunc which, const ConfigFields& f, const Exponents& e) {
	switch (which) {
		case AFunc::A1:
			return detail::node_sup("A1", f.grid, [&](int i, int j) {
				return pow0(f.w_suf.at({i, j}), 1.0 / e.q) * pow0(f.sigma_pre.at({i, j}), 1.0 / e.p_conj);
			});
		case AFunc::A2: {
			CellField<2> inner(f.grid);
			for (std::int64_t k = 0; k < inner.size(); ++k)
				inner[k] = pow0(f.sigma_pre_mid[k], e.q) * f.w[k];
			const NodeField<2> G = prefix_cumulate(inner);
			return detail::node_sup("A2", f.grid, [&](int i, int j) {
				const double denom = f.sigma_pre.at({i, j});
				if (denom <= 0.0) return 0.0;
				return pow0(G.at({i, j}), 1.0 / e.q) * std::pow(denom, -1.0 / e.p);
			});
		}
		case AFunc::A3: {
			CellField<2> inner(f.grid);
			for (std::int64_t k = 0; k < inner.size(); ++k)
				inner[k] = pow0(f.w_suf_mid[k], e.p_conj) * f.sigma[k];
			const NodeField<2> H = suffix_cumulate(inner);
			return detail::node_sup("A3", f.grid, [&](int i, int j) {
				const double denom = f.w_suf.at({i, j});
				if (denom <= 0.0) return 0.0;
				return pow0(H.at({i, j}), 1.0 / e.p_conj) * std::pow(denom, -1.0 / e.q_conj);
			});
		}
	}
	throw std::logic_error("unreachable");
}

namespace detail {

template <typename F>
NodeField<2> node_transform(const NodeField<2>& src, F&& fn) {
	NodeField<2> out(src.grid(), src.dir());
	for (std::int64_t k = 0; k < src.size(); ++k) out[k] = fn(src[k]);
	return out;
}

// geometric midrange of the positive entries; reference scale that halves the
// exponent spread when the field is raised to a large power
inline double geo_midrange(const NodeField<2>& f) {
	double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
	for (std::int64_t k = 0; k < f.size(); ++k)
		if (f[k] > 0.0) {
			lo = std::min(lo, f[k]);
			hi = std::max(hi, f[k]);
		}
	if (!(hi > 0.0)) return 1.0;
	return std::sqrt(lo) * std::sqrt(hi);
}

inline double max_value(const NodeField<2>& f) {
	double hi = 0.0;
	for (std::int64_t k = 0; k < f.size(); ++k) hi = std::max(hi, f[k]);
	return hi > 0.0 ? hi : 1.0;
}

}  // namespace detail

inline FunctionalValue b_functional(BFunc which, const ConfigFields& f, const Exponents& e) {
	if (e.zone != Zone::QLessP) throw std::invalid_argument("functional: B family needs q < p");
	const double r = e.r;
	FunctionalValue out;
	switch (which) {
		case BFunc::B1: {
			// trapezoid pairing of [prefix sigma]^(r/p') against the measure of
			// [suffix w]^(r/q); both transformed fields keep their vanishing faces,
			// so the discrete integration-by-parts identity holds exactly and the
			// value is nonnegative. The corner-mean rule is second-order consistent,
			// which the quadrature self-check of the dual-kernel probe relies on.
			// Fields are normalized by their maxima so large r cannot overflow; the
			// scales re-enter through the value's power law.
			const double sp = detail::max_value(f.sigma_pre), sw = detail::max_value(f.w_suf);
			const auto phi = detail::node_transform(
			    f.sigma_pre, [&](double x) { return pow0(x / sp, r / e.p_conj); });
			const auto psi =
			    detail::node_transform(f.w_suf, [&](double x) { return pow0(x / sw, r / e.q); });
			out.name = "B1";
			out.value = std::pow(sp, 1.0 / e.p_conj) * std::pow(sw, 1.0 / e.q) *
			            std::pow(std::max(0.0, stieltjes_box_integral_trapezoid(phi, psi)), 1.0 / r);
			return out;
		}
		case BFunc::B2: {
			CellField<2> inner(f.grid);
			for (std::int64_t k = 0; k < inner.size(); ++k)
				inner[k] = pow0(f.sigma_pre_mid[k], e.q) * f.w[k];
			const NodeField<2> G = prefix_cumulate(inner);
			const double sg = detail::max_value(G);
			const auto Psi =
			    detail::node_transform(G, [&](double x) { return pow0(x / sg, r / e.q); });
			// integrand [prefix sigma]^(-r/p) at the cell's lower-left corner; cells
			// whose corner carries no sigma mass contribute nothing (the measure
			// vanishes there too). The negative power is centered on the geometric
			// midrange to halve its dynamic range.
			const double sp = detail::geo_midrange(f.sigma_pre);
			const auto phi = detail::node_transform(
			    f.sigma_pre, [&](double x) { return pow0(x / sp, -r / e.p); });
			const auto s = stieltjes_signed(phi, Psi);
			out.name = "B2";
			out.value = std::pow(sp, -1.0 / e.p) * std::pow(sg, 1.0 / e.q) *
			            std::pow(std::max(0.0, s.value), 1.0 / r);
			out.neg_mass_fraction = s.negative_fraction();
			return out;
		}
		case BFunc::B3: {
			CellField<2> inner(f.grid);
			for (std::int64_t k = 0; k < inner.size(); ++k)
				inner[k] = pow0(f.w_suf_mid[k], e.p_conj) * f.sigma[k];
			const NodeField<2> H = suffix_cumulate(inner);
			const double sh = detail::max_value(H);
			const auto Psi =
			    detail::node_transform(H, [&](double x) { return pow0(x / sh, r / e.p_conj); });
			const double sw = detail::geo_midrange(f.w_suf);
			const auto phi = detail::node_transform(
			    f.w_suf, [&](double x) { return pow0(x / sw, -r / e.q_conj); });
			const auto s = stieltjes_signed(phi, Psi);
			out.name = "B3";
			out.value = std::pow(sw, -1.0 / e.q_conj) * std::pow(sh, 1.0 / e.p_conj) *
			            std::pow(std::max(0.0, s.value), 1.0 / r);
			out.neg_mass_fraction = s.negative_fraction();
			return out;
		}
	}
	throw std::logic_error("unreachable");
}

inline FunctionalValue bv_functional(BvFunc which, const ConfigFields& f, const Exponents& e) {
	if (e.zone != Zone::QLessP) throw std::invalid_argument("functional: Bv family needs q < p");
	const double r = e.r;
	FunctionalValue out;
	Accum acc;
	const int n0 = f.grid->cells(0), n1 = f.grid->cells(1);
	double scale = 1.0, inner_exp = 1.0;
	if (which == BvFunc::Bv) {
		CellField<2> inner(f.grid);
		for (std::int64_t k = 0; k < inner.size(); ++k)
			inner[k] = pow0(f.sigma_pre_mid[k], e.q - 1.0) * f.w[k];
		const auto K = cell_center_values(suffix_cumulate(inner));
		double sk = 0.0;
		for (std::int64_t k = 0; k < K.size(); ++k) sk = std::max(sk, K[k]);
		if (sk == 0.0) sk = 1.0;
		for (int i = 0; i < n0; ++i)
			for (int j = 0; j < n1; ++j) {
				const double s = f.sigma.at({i, j});
				if (s == 0.0) continue;
				acc.add(s * pow0(K.at({i, j}) / sk, r / e.q) * f.grid->width(0, i) * f.grid->width(1, j));
			}
		out.name = "Bv";
		scale = sk;
		inner_exp = 1.0 / e.q;
	} else {
		CellField<2> inner(f.grid);
		for (std::int64_t k = 0; k < inner.size(); ++k)
			inner[k] = pow0(f.w_suf_mid[k], e.p_conj - 1.0) * f.sigma[k];
		const auto M = cell_center_values(prefix_cumulate(inner));
		double sm = 0.0;
		for (std::int64_t k = 0; k < M.size(); ++k) sm = std::max(sm, M[k]);
		if (sm == 0.0) sm = 1.0;
		for (int i = 0; i < n0; ++i)
			for (int j = 0; j < n1; ++j) {
				const double wv = f.w.at({i, j});
				if (wv == 0.0) continue;
				acc.add(wv * pow0(M.at({i, j}) / sm, r / e.p_conj) * f.grid->width(0, i) *
				        f.grid->width(1, j));
			}
		out.name = "Bw";
		scale = sm;
		inner_exp = 1.0 / e.p_conj;
	}
	out.value = std::pow(scale, inner_exp) * std::pow(std::max(0.0, acc.value()), 1.0 / r);
	return out;
}

struct ChainEntry {
	std::string label;
	double lhs = 0.0;    // chained functional value
	double bound = 0.0;  // asserted majorant
	double margin() const { return bound - lhs; }
	bool holds(double rel_slack = 1e-10) const {
		return lhs <= bound + rel_slack * std::max(1.0, std::fabs(bound));
	}
};

struct ZoneChainReport {
	Zone zone = Zone::Diagonal;
	int b_zone = 0;
	std::vector<ChainEntry> entries;
	bool all_hold(double rel_slack = 1e-10) const {
		return std::all_of(entries.begin(), entries.end(),
		                   [&](const ChainEntry& c) { return c.holds(rel_slack); });
	}
};

// Evaluates the asserted chained bounds between the functionals in the current
// zone: A2/A3 against A1 for p < q, B2/B3 against B1 in the doubly-regular
// q < p sub-zone.
inline ZoneChainReport zone_chain(const ConfigFields& f, const Exponents& e) {
	ZoneChainReport rep;
	rep.zone = e.zone;
	const ConstantSet c = constants(e);
	if (e.zone == Zone::PLessQ) {
		const double a1 = a_functional(AFunc::A1, f, e).value;
		const double a2 = a_functional(AFunc::A2, f, e).value;
		const double a3 = a_functional(AFunc::A3, f, e).value;
		rep.entries.push_back({"A2 <= alpha^(1/q) A1", a2, std::pow(*c.alpha, 1.0 / e.q) * a1});
		rep.entries.push_back(
		    {"A3 <= alpha'^(1/p') A1", a3, std::pow(*c.alpha_conj, 1.0 / e.p_conj) * a1});
	} else if (e.zone == Zone::QLessP) {
		rep.b_zone = c.b_zone;
		if (c.b_zone == 1) {
			const double b1 = b_functional(BFunc::B1, f, e).value;
			const double b2 = b_functional(BFunc::B2, f, e).value;
			const double b3 = b_functional(BFunc::B3, f, e).value;
			rep.entries.push_back({"B2 <= bold_beta(p,q) B1", b2, *c.bold_beta_pq * b1});
			rep.entries.push_back({"B3 <= bold_beta(q',p') B1", b3, *c.bold_beta_qconj_pconj * b1});
		}
	}
	return rep;
}

}  // namespace hardycert
