#pragma once
// Boundedness functionals for the n-dimensional rectangular integration
// operator under factorizable weights: single-supremum conditions for the
// increasing-exponent ordering and integral reductions for the decreasing one.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hardycert/cumulate.hpp"
#include "hardycert/functionals.hpp"
#include "hardycert/grid.hpp"
#include "hardycert/util.hpp"
#include "hardycert/weight.hpp"

namespace hardycert {

enum class MultiFunc { AMn, ATn, AMnStar, ATnStar, BMRn, BPSn, BMRnStar, BPSnStar, AW };

inline const char* multi_func_base(MultiFunc which) {
	switch (which) {
		case MultiFunc::AMn: return "AM";
		case MultiFunc::ATn: return "AT";
		case MultiFunc::AMnStar: return "AM";
		case MultiFunc::ATnStar: return "AT";
		case MultiFunc::BMRn: return "BMR";
		case MultiFunc::BPSn: return "BPS";
		case MultiFunc::BMRnStar: return "BMR";
		case MultiFunc::BPSnStar: return "BPS";
		case MultiFunc::AW: return "AW";
	}
	return "?";
}

inline bool multi_func_starred(MultiFunc which) {
	return which == MultiFunc::AMnStar || which == MultiFunc::ATnStar ||
	       which == MultiFunc::BMRnStar || which == MultiFunc::BPSnStar;
}

namespace detail {

// 1-d running integral of per-cell samples along one grid axis
inline std::vector<double> axis_prefix_nodes(const std::vector<double>& cells,
                                             const std::vector<double>& widths) {
	std::vector<double> nodes(cells.size() + 1, 0.0);
	Accum acc;
	for (std::size_t k = 0; k < cells.size(); ++k) {
		acc.add(cells[k] * widths[k]);
		nodes[k + 1] = acc.value();
	}
	return nodes;
}

inline std::vector<double> axis_suffix_nodes(const std::vector<double>& cells,
                                             const std::vector<double>& widths) {
	std::vector<double> nodes(cells.size() + 1, 0.0);
	Accum acc;
	for (std::size_t k = cells.size(); k-- > 0;) {
		acc.add(cells[k] * widths[k]);
		nodes[k] = acc.value();
	}
	return nodes;
}

inline std::vector<double> axis_cell_centers(const std::vector<double>& nodes) {
	std::vector<double> mids(nodes.size() - 1);
	for (std::size_t k = 0; k + 1 < nodes.size(); ++k) mids[k] = 0.5 * (nodes[k] + nodes[k + 1]);
	return mids;
}

template <int N>
std::array<std::vector<double>, N> axis_widths(const Grid<N>& g) {
	std::array<std::vector<double>, N> w;
	for (int d = 0; d < N; ++d) {
		w[d].resize(std::size_t(g.cells(d)));
		for (int k = 0; k < g.cells(d); ++k) w[d][std::size_t(k)] = g.width(d, k);
	}
	return w;
}

// per-axis cumulations of a factorized weight: node values and cell centers
template <int N>
struct AxisCumulations {
	std::array<std::vector<double>, N> samples;  // factor value per cell
	std::array<std::vector<double>, N> nodes;    // running integral at nodes
	std::array<std::vector<double>, N> mids;     // running integral at cell centers
};

template <int N>
AxisCumulations<N> cumulate_factors(const Weight<N>& wt, const Grid<N>& g, bool from_origin) {
	if (!wt.factorizable())
		throw std::invalid_argument("multidim: functional requires a factorizable weight");
	AxisCumulations<N> out;
	auto widths = axis_widths(g);
	for (int d = 0; d < N; ++d) {
		out.samples[d] = wt.factor_samples(g, d);
		out.nodes[d] = from_origin ? axis_prefix_nodes(out.samples[d], widths[std::size_t(d)])
		                           : axis_suffix_nodes(out.samples[d], widths[std::size_t(d)]);
		out.mids[d] = axis_cell_centers(out.nodes[d]);
	}
	return out;
}

// dual weight factors sigma_i = v_i^(1-p') cumulated from the origin
template <int N>
AxisCumulations<N> sigma_factors(const Weight<N>& v, const Grid<N>& g, const Exponents& e) {
	return cumulate_factors(dual_weight(v, e), g, true);
}

// sup over all grid nodes of an N-d expression; lexicographically first strict
// maximum wins
template <int N, typename F>
FunctionalValue multi_node_sup(std::string name, const GridPtr<N>& g, F&& node_value) {
	std::array<int, N> ext;
	for (int d = 0; d < N; ++d) ext[d] = g->cells(d) + 1;
	Layout<N> lay(ext);
	FunctionalValue out;
	out.name = std::move(name);
	double best = 0.0;
	std::array<int, N> arg{};
	std::array<int, N> idx{};
	do {
		const double val = node_value(idx);
		if (!std::isfinite(val)) throw std::domain_error("functional: non-finite sup candidate");
		if (val > best) {
			best = val;
			arg = idx;
		}
	} while (lay.advance(idx));
	out.value = best;
	out.has_witness = true;
	out.witness.resize(N);
	out.witness_node.resize(N);
	for (int d = 0; d < N; ++d) {
		out.witness[std::size_t(d)] = g->node(d, arg[d]);
		out.witness_node[std::size_t(d)] = arg[d];
	}
	return out;
}

template <int N>
double max_entry(const NodeField<N>& f) {
	double hi = 0.0;
	for (std::int64_t k = 0; k < f.size(); ++k) hi = std::max(hi, f[k]);
	return hi > 0.0 ? hi : 1.0;
}

inline double max_entry(const std::vector<double>& v) {
	double hi = 0.0;
	for (double x : v) hi = std::max(hi, x);
	return hi > 0.0 ? hi : 1.0;
}

inline double geo_midrange(const std::vector<double>& v) {
	double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
	for (double x : v)
		if (x > 0.0) {
			lo = std::min(lo, x);
			hi = std::max(hi, x);
		}
	if (!(hi > 0.0)) return 1.0;
	return std::sqrt(lo) * std::sqrt(hi);
}

}  // namespace detail

// Desk-scale surrogate for the divergence hypotheses on 1-d cumulations: the
// fraction of each factor's total mass contributed by the outer half of the
// index range. A tail exponent at or above -1 keeps the fraction bounded away
// from zero on wide log truncations; the hypothesis is reported, not enforced.
struct DivergenceCheck {
	std::vector<double> tail_fraction;
	double threshold = 0.2;
	bool plausible = false;
};

template <int N>
DivergenceCheck divergence_check(MultiFunc which, const Weight<N>& v, const Weight<N>& w,
                                 const GridPtr<N>& g, const Exponents& e) {
	DivergenceCheck out;
	const bool starred = multi_func_starred(which);
	auto cums = starred ? detail::cumulate_factors(w, *g, false) : detail::sigma_factors(v, *g, e);
	out.plausible = true;
	for (int d = 0; d < N; ++d) {
		const auto& nodes = cums.nodes[d];
		const int n = g->cells(d);
		const int half = n / 2;
		double frac = 0.0;
		if (starred) {
			// mass near zero: fraction carried by the lower half of the range
			const double total = nodes[0];
			if (total > 0.0) frac = (total - nodes[std::size_t(half)]) / total;
		} else {
			const double total = nodes[std::size_t(n)];
			if (total > 0.0) frac = (total - nodes[std::size_t(half)]) / total;
		}
		out.tail_fraction.push_back(frac);
		if (!(frac >= out.threshold)) out.plausible = false;
	}
	return out;
}

template <int N>
FunctionalValue multidim_functional(MultiFunc which, const Weight<N>& v, const Weight<N>& w,
                                    const GridPtr<N>& g, const Exponents& e,
                                    std::optional<std::array<double, 2>> s_params = std::nullopt) {
	const std::string name =
	    std::string(multi_func_base(which)) +
	    (which == MultiFunc::AW ? "" : std::to_string(N)) + (multi_func_starred(which) ? "*" : "");

	switch (which) {
		case MultiFunc::AMn: {
			auto sig = detail::sigma_factors(v, *g, e);
			const NodeField<N> W = suffix_cumulate(sample(w, g));
			return detail::multi_node_sup<N>(name, g, [&](const std::array<int, N>& t) {
				double prod = pow0(W.at(t), 1.0 / e.q);
				for (int d = 0; d < N && prod > 0.0; ++d)
					prod *= pow0(sig.nodes[d][std::size_t(t[d])], 1.0 / e.p_conj);
				return prod;
			});
		}
		case MultiFunc::ATn: {
			auto sig = detail::sigma_factors(v, *g, e);
			CellField<N> inner = sample(w, g);
			{
				Layout<N> lay = inner.layout();
				std::array<int, N> c{};
				do {
					double prod = 1.0;
					for (int d = 0; d < N; ++d) prod *= pow0(sig.mids[d][std::size_t(c[d])], e.q);
					inner.at(c) *= prod;
				} while (lay.advance(c));
			}
			const NodeField<N> G = prefix_cumulate(inner);
			return detail::multi_node_sup<N>(name, g, [&](const std::array<int, N>& t) {
				double denom = 1.0;
				for (int d = 0; d < N; ++d) denom *= sig.nodes[d][std::size_t(t[d])];
				if (denom <= 0.0) return 0.0;
				return pow0(G.at(t), 1.0 / e.q) * std::pow(denom, -1.0 / e.p);
			});
		}
		case MultiFunc::AMnStar: {
			auto wf = detail::cumulate_factors(w, *g, false);
			const NodeField<N> S = prefix_cumulate(sample(dual_weight(v, e), g));
			return detail::multi_node_sup<N>(name, g, [&](const std::array<int, N>& t) {
				double prod = pow0(S.at(t), 1.0 / e.p_conj);
				for (int d = 0; d < N && prod > 0.0; ++d)
					prod *= pow0(wf.nodes[d][std::size_t(t[d])], 1.0 / e.q);
				return prod;
			});
		}
		case MultiFunc::ATnStar: {
			auto wf = detail::cumulate_factors(w, *g, false);
			CellField<N> inner = sample(dual_weight(v, e), g);
			{
				Layout<N> lay = inner.layout();
				std::array<int, N> c{};
				do {
					double prod = 1.0;
					for (int d = 0; d < N; ++d) prod *= pow0(wf.mids[d][std::size_t(c[d])], e.p_conj);
					inner.at(c) *= prod;
				} while (lay.advance(c));
			}
			const NodeField<N> H = suffix_cumulate(inner);
			return detail::multi_node_sup<N>(name, g, [&](const std::array<int, N>& t) {
				double denom = 1.0;
				for (int d = 0; d < N; ++d) denom *= wf.nodes[d][std::size_t(t[d])];
				if (denom <= 0.0) return 0.0;
				return pow0(H.at(t), 1.0 / e.p_conj) * std::pow(denom, -1.0 / e.q_conj);
			});
		}
		case MultiFunc::BMRn: {
			if (e.zone != Zone::QLessP)
				throw std::invalid_argument("multidim: reduction functionals need q < p");
			auto sig = detail::sigma_factors(v, *g, e);
			const CellField<N> Wmid = cell_center_values(suffix_cumulate(sample(w, g)));
			const double sW = [&] {
				double hi = 0.0;
				for (std::int64_t k = 0; k < Wmid.size(); ++k) hi = std::max(hi, Wmid[k]);
				return hi > 0.0 ? hi : 1.0;
			}();
			std::array<double, N> sS;
			for (int d = 0; d < N; ++d) sS[d] = detail::max_entry(sig.mids[d]);
			Accum acc;
			Layout<N> lay = Wmid.layout();
			std::array<int, N> c{};
			do {
				double term = pow0(Wmid.at(c) / sW, e.r / e.q);
				for (int d = 0; d < N && term > 0.0; ++d)
					term *= pow0(sig.mids[d][std::size_t(c[d])] / sS[d], e.r / e.q_conj) *
					        sig.samples[d][std::size_t(c[d])];
				if (term > 0.0) acc.add(term * Wmid.cell_volume(c));
			} while (lay.advance(c));
			FunctionalValue out;
			out.name = name;
			double scale = std::pow(sW, 1.0 / e.q);
			for (int d = 0; d < N; ++d) scale *= std::pow(sS[d], 1.0 / e.q_conj);
			out.value = scale * std::pow(std::max(0.0, acc.value()), 1.0 / e.r);
			return out;
		}
		case MultiFunc::BPSn: {
			if (e.zone != Zone::QLessP)
				throw std::invalid_argument("multidim: reduction functionals need q < p");
			auto sig = detail::sigma_factors(v, *g, e);
			CellField<N> inner = sample(w, g);
			{
				Layout<N> lay = inner.layout();
				std::array<int, N> c{};
				do {
					double prod = 1.0;
					for (int d = 0; d < N; ++d) prod *= pow0(sig.mids[d][std::size_t(c[d])], e.q);
					inner.at(c) *= prod;
				} while (lay.advance(c));
			}
			const CellField<N> Gmid = cell_center_values(prefix_cumulate(inner));
			const double sG = [&] {
				double hi = 0.0;
				for (std::int64_t k = 0; k < Gmid.size(); ++k) hi = std::max(hi, Gmid[k]);
				return hi > 0.0 ? hi : 1.0;
			}();
			std::array<double, N> sS;
			for (int d = 0; d < N; ++d) sS[d] = detail::geo_midrange(sig.mids[d]);
			Accum acc;
			Layout<N> lay = Gmid.layout();
			std::array<int, N> c{};
			do {
				double term = 1.0;
				for (int d = 0; d < N && term > 0.0; ++d) {
					const double s_cell = sig.samples[d][std::size_t(c[d])];
					if (s_cell == 0.0) {
						term = 0.0;
						break;
					}
					term *= std::pow(sig.mids[d][std::size_t(c[d])] / sS[d], -e.r / e.q) * s_cell;
				}
				if (term > 0.0) acc.add(term * pow0(Gmid.at(c) / sG, e.r / e.q) * Gmid.cell_volume(c));
			} while (lay.advance(c));
			FunctionalValue out;
			out.name = name;
			double scale = std::pow(sG, 1.0 / e.q);
			for (int d = 0; d < N; ++d) scale *= std::pow(sS[d], -1.0 / e.q);
			out.value = scale * std::pow(std::max(0.0, acc.value()), 1.0 / e.r);
			return out;
		}
		case MultiFunc::BMRnStar: {
			if (e.zone != Zone::QLessP)
				throw std::invalid_argument("multidim: reduction functionals need q < p");
			auto wf = detail::cumulate_factors(w, *g, false);
			const CellField<N> Smid = cell_center_values(prefix_cumulate(sample(dual_weight(v, e), g)));
			const double sS = [&] {
				double hi = 0.0;
				for (std::int64_t k = 0; k < Smid.size(); ++k) hi = std::max(hi, Smid[k]);
				return hi > 0.0 ? hi : 1.0;
			}();
			std::array<double, N> sW;
			for (int d = 0; d < N; ++d) sW[d] = detail::max_entry(wf.mids[d]);
			Accum acc;
			Layout<N> lay = Smid.layout();
			std::array<int, N> c{};
			do {
				double term = pow0(Smid.at(c) / sS, e.r / e.p_conj);
				for (int d = 0; d < N && term > 0.0; ++d)
					term *= pow0(wf.mids[d][std::size_t(c[d])] / sW[d], e.r / e.p) *
					        wf.samples[d][std::size_t(c[d])];
				if (term > 0.0) acc.add(term * Smid.cell_volume(c));
			} while (lay.advance(c));
			FunctionalValue out;
			out.name = name;
			double scale = std::pow(sS, 1.0 / e.p_conj);
			for (int d = 0; d < N; ++d) scale *= std::pow(sW[d], 1.0 / e.p);
			out.value = scale * std::pow(std::max(0.0, acc.value()), 1.0 / e.r);
			return out;
		}
		case MultiFunc::BPSnStar: {
			if (e.zone != Zone::QLessP)
				throw std::invalid_argument("multidim: reduction functionals need q < p");
			auto wf = detail::cumulate_factors(w, *g, false);
			CellField<N> inner = sample(dual_weight(v, e), g);
			{
				Layout<N> lay = inner.layout();
				std::array<int, N> c{};
				do {
					double prod = 1.0;
					for (int d = 0; d < N; ++d) prod *= pow0(wf.mids[d][std::size_t(c[d])], e.p_conj);
					inner.at(c) *= prod;
				} while (lay.advance(c));
			}
			const CellField<N> Hmid = cell_center_values(suffix_cumulate(inner));
			const double sH = [&] {
				double hi = 0.0;
				for (std::int64_t k = 0; k < Hmid.size(); ++k) hi = std::max(hi, Hmid[k]);
				return hi > 0.0 ? hi : 1.0;
			}();
			std::array<double, N> sW;
			for (int d = 0; d < N; ++d) sW[d] = detail::geo_midrange(wf.mids[d]);
			Accum acc;
			Layout<N> lay = Hmid.layout();
			std::array<int, N> c{};
			do {
				double term = 1.0;
				for (int d = 0; d < N && term > 0.0; ++d) {
					const double w_cell = wf.samples[d][std::size_t(c[d])];
					if (w_cell == 0.0) {
						term = 0.0;
						break;
					}
					term *= std::pow(wf.mids[d][std::size_t(c[d])] / sW[d], -e.r / e.p_conj) * w_cell;
				}
				if (term > 0.0)
					acc.add(term * pow0(Hmid.at(c) / sH, e.r / e.p_conj) * Hmid.cell_volume(c));
			} while (lay.advance(c));
			FunctionalValue out;
			out.name = name;
			double scale = std::pow(sH, 1.0 / e.p_conj);
			for (int d = 0; d < N; ++d) scale *= std::pow(sW[d], -1.0 / e.p_conj);
			out.value = scale * std::pow(std::max(0.0, acc.value()), 1.0 / e.r);
			return out;
		}
		case MultiFunc::AW: {
			if constexpr (N != 2) {
				throw std::invalid_argument("multidim: the Wedestig functional is two-dimensional");
			} else {
				if (e.zone == Zone::QLessP)
					throw std::invalid_argument("multidim: the Wedestig functional needs p <= q");
				if (!s_params) throw std::invalid_argument("multidim: s parameters required");
				const double s1 = (*s_params)[0], s2 = (*s_params)[1];
				if (!(s1 > 1.0 && s1 < e.p && s2 > 1.0 && s2 < e.p))
					throw std::invalid_argument("multidim: s parameters must lie in (1, p)");
				auto sig = detail::sigma_factors(v, *g, e);
				CellField<2> inner = sample(w, g);
				for (int i = 0; i < g->cells(0); ++i)
					for (int j = 0; j < g->cells(1); ++j)
						inner.at({i, j}) *= pow0(sig.mids[0][std::size_t(i)], e.q * (e.p - s1) / e.p) *
						                    pow0(sig.mids[1][std::size_t(j)], e.q * (e.p - s2) / e.p);
				const NodeField<2> T = suffix_cumulate(inner);
				return detail::multi_node_sup<2>(name, g, [&](const std::array<int, 2>& t) {
					return pow0(sig.nodes[0][std::size_t(t[0])], (s1 - 1.0) / e.p) *
					       pow0(sig.nodes[1][std::size_t(t[1])], (s2 - 1.0) / e.p) *
					       pow0(T.at(t), 1.0 / e.q);
				});
			}
		}
	}
	throw std::logic_error("unreachable");
}

}  // namespace hardycert
