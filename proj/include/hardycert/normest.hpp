#pragma once
// Direct estimation of the best constant: the Rayleigh ratio of the
// rectangular operator, structured lower-bound probes (rectangle indicators
// and the dual-kernel test function), and a fixed-point ascent that preserves
// the nonnegative cone by construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hardycert/cumulate.hpp"
#include "hardycert/functionals.hpp"
#include "hardycert/grid.hpp"
#include "hardycert/util.hpp"
#include "hardycert/weight.hpp"

namespace hardycert {

struct NormEstimate {
	double value = 0.0;        // best ratio over every start and iterate
	double probe_lower = 0.0;  // best ratio over the structured probes alone
	std::vector<double> ascent_trace;  // per-iteration ratios of the best start
	bool converged = false;
	CellField<2> argmax_function;  // normalized iterate attaining the best ratio
	int best_start = -1;
};

// Dual-kernel test function f = sigma * J with J given by a tail integral of
// the two cumulations; J^p is tabulated at grid nodes, cells carry the
// corner mean of J^p.
struct TestFunctionB {
	CellField<2> f;
	NodeField<2> J_field;
};

struct ProbeBResult {
	TestFunctionB test;
	double ratio = 0.0;
	double lhs = 0.0;           // integral of f^p v
	double rhs = 0.0;           // (p' q / r^2) * B1^r
	double identity_dev = 0.0;  // relative gap between the two
};

struct RectProbeResult {
	double ratio = 0.0;
	std::array<int, 2> node{0, 0};
	bool sigma_weighted = true;
	CellField<2> f;
};

// || I_2 f ||_{L^q_w} / || f ||_{L^p_v} on the grid
inline double rayleigh_ratio(const CellField<2>& f, const Weight<2>& v, const Weight<2>& w,
                             const Exponents& e) {
	const GridPtr<2>& g = f.grid();
	for (std::int64_t k = 0; k < f.size(); ++k)
		if (!(f[k] >= 0.0) || !std::isfinite(f[k]))
			throw std::invalid_argument("rayleigh: test function must be finite and nonnegative");
	const CellField<2> vc = sample(v, g);
	const CellField<2> wc = sample(w, g);
	const CellField<2> Fm = cell_center_values(prefix_cumulate(f));
	Accum num, den;
	for (int i = 0; i < g->cells(0); ++i)
		for (int j = 0; j < g->cells(1); ++j) {
			const double vol = g->width(0, i) * g->width(1, j);
			num.add(pow0(Fm.at({i, j}), e.q) * wc.at({i, j}) * vol);
			den.add(pow0(f.at({i, j}), e.p) * vc.at({i, j}) * vol);
		}
	if (!(den.value() > 0.0)) throw std::invalid_argument("rayleigh: zero denominator");
	const double ratio = std::pow(num.value(), 1.0 / e.q) / std::pow(den.value(), 1.0 / e.p);
	if (!std::isfinite(ratio)) throw std::domain_error("rayleigh: non-finite ratio");
	return ratio;
}

namespace detail {

// Best rectangle probe f = rho * indicator of (0,s)x(0,t) over all nodes.
// The numerator splits into four regions relative to the rectangle corner:
// below-left keeps the running cumulation of rho, the two side strips clip
// one coordinate at the corner, and the far region is constant; each table
// is O(M^2) total.
struct RectSweep {
	double best = 0.0;
	std::array<int, 2> node{0, 0};
	bool found = false;
};

inline RectSweep sweep_rectangles(const CellField<2>& rho, const CellField<2>& dens,
                                  const CellField<2>& wc, const Exponents& e) {
	const GridPtr<2>& g = rho.grid();
	const int m0 = g->cells(0), m1 = g->cells(1);
	const NodeField<2> P = prefix_cumulate(rho);
	const NodeField<2> D = prefix_cumulate(dens);
	const CellField<2> Pmid = cell_center_values(P);

	CellField<2> wvol(g, 0.0);
	CellField<2> inner(g, 0.0);
	for (int i = 0; i < m0; ++i)
		for (int j = 0; j < m1; ++j) {
			const double vol = g->width(0, i) * g->width(1, j);
			wvol.at({i, j}) = wc.at({i, j}) * vol;
			inner.at({i, j}) = pow0(Pmid.at({i, j}), e.q) * wc.at({i, j});
		}
	const NodeField<2> U1 = prefix_cumulate(inner);

	// suffix of w*vol along one axis, at every node of that axis
	std::vector<double> wrow(std::size_t((m0 + 1) * m1), 0.0);  // [si][j]
	for (int j = 0; j < m1; ++j)
		for (int i = m0; i-- > 0;)
			wrow[std::size_t(i * m1 + j)] = wrow[std::size_t((i + 1) * m1 + j)] + wvol.at({i, j});
	std::vector<double> wcol(std::size_t(m0 * (m1 + 1)), 0.0);  // [i][tj]
	for (int i = 0; i < m0; ++i)
		for (int j = m1; j-- > 0;)
			wcol[std::size_t(i * (m1 + 1) + j)] = wcol[std::size_t(i * (m1 + 1) + j + 1)] + wvol.at({i, j});

	NodeField<2> Wsuf(g, Dir::Upper, 0.0);
	for (int i = m0; i-- > 0;)
		for (int j = m1; j-- > 0;)
			Wsuf.at({i, j}) = wvol.at({i, j}) + Wsuf.at({i + 1, j}) + Wsuf.at({i, j + 1}) - Wsuf.at({i + 1, j + 1});

	RectSweep out;
	std::vector<double> u2(std::size_t(m1 + 1));
	for (int si = 0; si <= m0; ++si) {
		// clip x at node si, midpoint in y
		u2[0] = 0.0;
		for (int j = 0; j < m1; ++j) {
			const double pm = 0.5 * (P.at({si, j}) + P.at({si, j + 1}));
			u2[std::size_t(j + 1)] = u2[std::size_t(j)] + pow0(pm, e.q) * wrow[std::size_t(si * m1 + j)];
		}
		for (int tj = 0; tj <= m1; ++tj) {
			const double den = D.at({si, tj});
			if (!(den > 0.0)) continue;
			// clip y at node tj, midpoint in x
			double u3 = 0.0;
			for (int i = 0; i < si; ++i) {
				const double pm = 0.5 * (P.at({i, tj}) + P.at({i + 1, tj}));
				u3 += pow0(pm, e.q) * wcol[std::size_t(i * (m1 + 1) + tj)];
			}
			const double numq = U1.at({si, tj}) + u2[std::size_t(tj)] + u3 +
			                    pow0(P.at({si, tj}), e.q) * Wsuf.at({si, tj});
			const double ratio = std::pow(numq, 1.0 / e.q) / std::pow(den, 1.0 / e.p);
			if (!std::isfinite(ratio)) throw std::domain_error("probe: non-finite ratio");
			if (ratio > out.best) {
				out.best = ratio;
				out.node = {si, tj};
				out.found = true;
			}
		}
	}
	return out;
}

}  // namespace detail

// Sweep f = sigma * indicator and f = indicator over all node-cornered
// rectangles; the better family wins, ties keep the weighted one.
inline RectProbeResult probe_rectangles(const Weight<2>& v, const Weight<2>& w, const Exponents& e,
                                        const GridPtr<2>& g) {
	const CellField<2> sig = sample(dual_weight(v, e), g);
	const CellField<2> vc = sample(v, g);
	const CellField<2> wc = sample(w, g);
	CellField<2> ones(g, 1.0);

	// f = sigma chi: the denominator density sigma^p v equals sigma pointwise
	auto weighted = detail::sweep_rectangles(sig, sig, wc, e);
	auto raw = detail::sweep_rectangles(ones, vc, wc, e);

	RectProbeResult out;
	out.sigma_weighted = !(raw.best > weighted.best);
	const auto& pick = out.sigma_weighted ? weighted : raw;
	out.ratio = pick.best;
	out.node = pick.node;
	out.f = CellField<2>(g, 0.0);
	for (int i = 0; i < pick.node[0]; ++i)
		for (int j = 0; j < pick.node[1]; ++j)
			out.f.at({i, j}) = out.sigma_weighted ? sig.at({i, j}) : 1.0;
	return out;
}

// Dual-kernel probe: J(s,y)^p is the tail integral over x > s of
// [I_2 sigma]^{r/q'} [I_2* w]^{r/p} (tail of w in the second coordinate),
// f = sigma J. Also reports the quadrature self-check of the closed form
// for the integral of f^p v.
inline ProbeBResult probe_B(const Weight<2>& v, const Weight<2>& w, const Exponents& e,
                            const GridPtr<2>& g) {
	if (e.zone != Zone::QLessP) throw std::invalid_argument("probe: dual-kernel probe needs q < p");
	const int m0 = g->cells(0), m1 = g->cells(1);
	auto f = ConfigFields::make(v, w, g, e);

	// tail of w in the y coordinate at x-cell i, y-node j
	std::vector<double> wtail(std::size_t(m0 * (m1 + 1)), 0.0);
	for (int i = 0; i < m0; ++i)
		for (int j = m1; j-- > 0;)
			wtail[std::size_t(i * (m1 + 1) + j)] =
			    wtail[std::size_t(i * (m1 + 1) + j + 1)] + f.w.at({i, j}) * g->width(1, j);

	// J^p at nodes: suffix over x-cells of the kernel at (x-mid, y-node)
	NodeField<2> Jp(g, Dir::Upper, 0.0);
	for (int j = 0; j <= m1; ++j) {
		double run = 0.0;
		for (int i = m0; i-- > 0;) {
			const double pm = 0.5 * (f.sigma_pre.at({i, j}) + f.sigma_pre.at({i + 1, j}));
			const double sm = 0.5 * (f.w_suf.at({i, j}) + f.w_suf.at({i + 1, j}));
			run += pow0(pm, e.r / e.q_conj) * pow0(sm, e.r / e.p) *
			       wtail[std::size_t(i * (m1 + 1) + j)] * g->width(0, i);
			Jp.at({i, j}) = run;
		}
	}

	ProbeBResult out;
	out.test.J_field = NodeField<2>(g, Dir::Upper, 0.0);
	for (std::int64_t k = 0; k < Jp.size(); ++k) out.test.J_field[k] = std::pow(Jp[k], 1.0 / e.p);
	out.test.f = CellField<2>(g, 0.0);
	Accum lhs;
	for (int i = 0; i < m0; ++i)
		for (int j = 0; j < m1; ++j) {
			const double jp_cell = 0.25 * (Jp.at({i, j}) + Jp.at({i + 1, j}) + Jp.at({i, j + 1}) +
			                               Jp.at({i + 1, j + 1}));
			out.test.f.at({i, j}) = f.sigma.at({i, j}) * std::pow(jp_cell, 1.0 / e.p);
			lhs.add(f.sigma.at({i, j}) * jp_cell * g->width(0, i) * g->width(1, j));
		}
	out.lhs = lhs.value();

	const double b1 = b_functional(BFunc::B1, f, e).value;
	out.rhs = (e.p_conj * e.q / (e.r * e.r)) * std::pow(b1, e.r);
	out.identity_dev = out.rhs > 0.0 ? std::abs(out.lhs - out.rhs) / out.rhs : (out.lhs > 0.0 ? 1.0 : 0.0);
	if (out.lhs > 0.0) out.ratio = rayleigh_ratio(out.test.f, v, w, e);
	return out;
}

// One Euler-Lagrange fixed-point step for the constrained ratio maximization,
// unnormalized: sigma * [tail cumulation of (running cumulation of f)^(q-1) w]^(1/(p-1)).
// Starting from f = sigma, the bracket is exactly the inner kernel of the
// integral reduction over the first weight.
inline CellField<2> ascend_step(const CellField<2>& f, const CellField<2>& sig,
                                const CellField<2>& wc, const Exponents& e) {
	const GridPtr<2>& g = f.grid();
	CellField<2> inner = cell_center_values(prefix_cumulate(f));
	for (int i = 0; i < g->cells(0); ++i)
		for (int j = 0; j < g->cells(1); ++j)
			inner.at({i, j}) = pow0(inner.at({i, j}), e.q - 1.0) * wc.at({i, j});
	CellField<2> out = cell_center_values(suffix_cumulate(inner));
	for (int i = 0; i < g->cells(0); ++i)
		for (int j = 0; j < g->cells(1); ++j)
			out.at({i, j}) = sig.at({i, j}) * pow0(out.at({i, j}), 1.0 / (e.p - 1.0));
	return out;
}

// Fixed-point ascent from the structured starts (constant, the dual weight,
// the best rectangle probe, the dual-kernel probe when q < p) plus any
// caller-supplied extras; returns the best ratio seen across all iterates.
inline NormEstimate ascend(const Weight<2>& v, const Weight<2>& w, const Exponents& e,
                           const GridPtr<2>& g,
                           const std::vector<CellField<2>>& extra_starts = {}, int iters = 500,
                           double tol = 1e-9) {
	const CellField<2> sig = sample(dual_weight(v, e), g);
	const CellField<2> vc = sample(v, g);
	const CellField<2> wc = sample(w, g);

	auto lp_norm = [&](const CellField<2>& f) {
		Accum den;
		for (int i = 0; i < g->cells(0); ++i)
			for (int j = 0; j < g->cells(1); ++j)
				den.add(pow0(f.at({i, j}), e.p) * vc.at({i, j}) * g->width(0, i) * g->width(1, j));
		return std::pow(den.value(), 1.0 / e.p);
	};
	auto ratio_of = [&](const CellField<2>& f) {
		const CellField<2> Fm = cell_center_values(prefix_cumulate(f));
		Accum num, den;
		for (int i = 0; i < g->cells(0); ++i)
			for (int j = 0; j < g->cells(1); ++j) {
				const double vol = g->width(0, i) * g->width(1, j);
				num.add(pow0(Fm.at({i, j}), e.q) * wc.at({i, j}) * vol);
				den.add(pow0(f.at({i, j}), e.p) * vc.at({i, j}) * vol);
			}
		if (!(den.value() > 0.0)) throw std::invalid_argument("rayleigh: zero denominator");
		const double ratio = std::pow(num.value(), 1.0 / e.q) / std::pow(den.value(), 1.0 / e.p);
		if (!std::isfinite(ratio)) throw std::domain_error("rayleigh: non-finite ratio");
		return ratio;
	};

	std::vector<CellField<2>> starts;
	starts.push_back(CellField<2>(g, 1.0));
	starts.push_back(sig);
	auto rect = probe_rectangles(v, w, e, g);
	if (rect.ratio > 0.0) starts.push_back(rect.f);
	NormEstimate est;
	est.probe_lower = rect.ratio;
	if (e.zone == Zone::QLessP) {
		auto pb = probe_B(v, w, e, g);
		est.probe_lower = std::max(est.probe_lower, pb.ratio);
		if (pb.ratio > 0.0) starts.push_back(pb.test.f);
	}
	for (const auto& s : extra_starts) {
		if (!same_grid(s.grid(), g)) throw std::invalid_argument("ascend: start bound to a different grid");
		if (!(lp_norm(s) > 0.0)) throw std::invalid_argument("ascend: all-zero start");
		starts.push_back(s);
	}

	for (std::size_t si = 0; si < starts.size(); ++si) {
		CellField<2> f = starts[si];
		const double n0 = lp_norm(f);
		if (!(n0 > 0.0)) continue;  // a structured start may vanish with the weight
		for (std::int64_t k = 0; k < f.size(); ++k) f[k] /= n0;

		std::vector<double> trace;
		double best_here = -1.0;
		CellField<2> best_f;
		bool conv = false;
		for (int it = 0; it <= iters; ++it) {
			const double ratio = ratio_of(f);
			trace.push_back(ratio);
			if (ratio > best_here) {
				best_here = ratio;
				best_f = f;
			}
			if (ratio == 0.0) {  // operator annihilates the cone: stop at once
				conv = true;
				break;
			}
			if (trace.size() > 1) {
				const double prev = trace[trace.size() - 2];
				if (std::abs(ratio - prev) <= tol * std::max(prev, 1e-300)) {
					conv = true;
					break;
				}
			}
			if (it == iters) break;
			CellField<2> next = ascend_step(f, sig, wc, e);
			const double nn = lp_norm(next);
			if (!(nn > 0.0)) {
				conv = true;
				break;
			}
			for (std::int64_t k = 0; k < next.size(); ++k) next[k] /= nn;
			f = std::move(next);
		}
		if (best_here > est.value || est.best_start < 0) {
			est.value = best_here;
			est.ascent_trace = std::move(trace);
			est.converged = conv;
			est.argmax_function = std::move(best_f);
			est.best_start = int(si);
		}
	}
	if (est.best_start < 0) throw std::invalid_argument("ascend: no admissible start");
	// a probe ratio is itself the ratio of an admissible test function
	est.value = std::max(est.value, est.probe_lower);
	return est;
}

}  // namespace hardycert
