// Weight descriptors on the truncated domain, the dual weight v^{1-p'}, and
// sampling onto grids.
//
// Three kinds:
//   power       c * x_1^{a_1} * ... * x_n^{a_n}
//   factorized  product of 1-d piecewise-power factors
//   table       explicit cell samples tied to a grid
// Power and factorized weights are closed under the dual transform, so sigma
// stays analytic on those paths; tables transform entrywise and must be
// strictly positive for the transform to exist.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "exponents.hpp"
#include "grid.hpp"

namespace hardycert {

enum class WeightKind { Power, Factorized, Table };

// 1-d factor: coef[k] * x^{expo[k]} on [edges[k-1], edges[k]), with edges
// strictly increasing; K edges split (0, inf) into K+1 pieces.
struct PiecewisePower {
	std::vector<double> edges;
	std::vector<double> coef{1.0};
	std::vector<double> expo{0.0};

	void validate() const {
		if (coef.size() != expo.size() || coef.size() != edges.size() + 1)
			throw std::invalid_argument("weight: factor needs edges.size()+1 pieces");
		for (std::size_t k = 0; k + 1 < edges.size(); ++k)
			if (!(edges[k] < edges[k + 1])) throw std::invalid_argument("weight: factor edges must increase");
		for (double e : edges)
			if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("weight: factor edges must be positive");
		for (double c : coef)
			if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("weight: factor coefficients must be nonnegative");
	}

	double value(double x) const {
		std::size_t k = 0;
		while (k < edges.size() && x >= edges[k]) ++k;
		return coef[k] * std::pow(x, expo[k]);
	}

	PiecewisePower powered(double s) const {
		PiecewisePower out;
		out.edges = edges;
		out.coef.resize(coef.size());
		out.expo.resize(expo.size());
		for (std::size_t k = 0; k < coef.size(); ++k) {
			if (!(coef[k] > 0.0)) throw std::domain_error("weight: factor vanishes, dual weight undefined");
			out.coef[k] = std::pow(coef[k], s);
			out.expo[k] = expo[k] * s;
		}
		return out;
	}
};

template <int N>
struct Weight {
	WeightKind kind = WeightKind::Power;
	// power
	double c = 1.0;
	std::array<double, N> expo{};
	// factorized
	std::array<PiecewisePower, N> factors{};
	// table
	CellField<N> table;

	static Weight power(double c, std::array<double, N> expo) {
		if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("weight: power coefficient must be positive");
		Weight w;
		w.kind = WeightKind::Power;
		w.c = c;
		w.expo = expo;
		return w;
	}
	static Weight factorized(std::array<PiecewisePower, N> factors) {
		for (const auto& f : factors) f.validate();
		Weight w;
		w.kind = WeightKind::Factorized;
		w.factors = std::move(factors);
		return w;
	}
	static Weight from_table(CellField<N> samples) {
		for (std::int64_t k = 0; k < samples.size(); ++k)
			if (!(samples[k] >= 0.0) || !std::isfinite(samples[k]))
				throw std::invalid_argument("weight: table entries must be finite and nonnegative");
		Weight w;
		w.kind = WeightKind::Table;
		w.table = std::move(samples);
		return w;
	}

	bool factorizable() const { return kind != WeightKind::Table; }

	// Analytic kinds only.
	double value(const std::array<double, N>& x) const {
		switch (kind) {
			case WeightKind::Power: {
				double v = c;
				for (int d = 0; d < N; ++d) v *= std::pow(x[std::size_t(d)], expo[std::size_t(d)]);
				return v;
			}
			case WeightKind::Factorized: {
				double v = 1.0;
				for (int d = 0; d < N; ++d) v *= factors[std::size_t(d)].value(x[std::size_t(d)]);
				return v;
			}
			case WeightKind::Table:
				throw std::logic_error("weight: table kind has no closed-form value");
		}
		return 0.0;
	}

	// 1-d factor of an analytic weight sampled at axis-d cell midpoints; the
	// power kind's constant is carried by factor 0.
	std::vector<double> factor_samples(const Grid<N>& g, int d) const {
		std::vector<double> out(std::size_t(g.cells(d)));
		for (int i = 0; i < g.cells(d); ++i) {
			const double x = g.mid(d, i);
			switch (kind) {
				case WeightKind::Power:
					out[std::size_t(i)] = (d == 0 ? c : 1.0) * std::pow(x, expo[std::size_t(d)]);
					break;
				case WeightKind::Factorized:
					out[std::size_t(i)] = factors[std::size_t(d)].value(x);
					break;
				case WeightKind::Table:
					throw std::logic_error("weight: table kind does not factorize");
			}
		}
		return out;
	}
};

// sigma = v^{1-p'}; analytic transform for power/factorized kinds, entrywise
// for tables. Rejects inputs that vanish where sigma would be infinite.
template <int N>
inline Weight<N> dual_weight(const Weight<N>& v, const Exponents& e) {
	const double s = 1.0 - e.p_conj;
	switch (v.kind) {
		case WeightKind::Power: {
			Weight<N> out = v;
			out.c = std::pow(v.c, s);
			for (int d = 0; d < N; ++d) out.expo[std::size_t(d)] = v.expo[std::size_t(d)] * s;
			return out;
		}
		case WeightKind::Factorized: {
			std::array<PiecewisePower, N> fs;
			for (int d = 0; d < N; ++d) fs[std::size_t(d)] = v.factors[std::size_t(d)].powered(s);
			return Weight<N>::factorized(std::move(fs));
		}
		case WeightKind::Table: {
			CellField<N> t = v.table;
			for (std::int64_t k = 0; k < t.size(); ++k) {
				if (!(t[k] > 0.0))
					throw std::domain_error("weight: zero table entry, dual weight would be infinite");
				t[k] = std::pow(t[k], s);
			}
			return Weight<N>::from_table(std::move(t));
		}
	}
	throw std::logic_error("weight: unknown kind");
}

// Midpoint samples on a grid; tables are bound to their own grid.
template <int N>
inline CellField<N> sample(const Weight<N>& wt, const GridPtr<N>& g) {
	if (wt.kind == WeightKind::Table) {
		if (!same_grid(wt.table.grid(), g)) throw std::invalid_argument("weight: table bound to a different grid");
		return wt.table;
	}
	CellField<N> out(g, 0.0);
	const Layout<N>& lay = out.layout();
	std::array<int, N> idx{};
	do {
		std::array<double, N> x;
		for (int d = 0; d < N; ++d) x[std::size_t(d)] = g->mid(d, idx[std::size_t(d)]);
		out.at(idx) = wt.value(x);
	} while (lay.advance(idx));
	return out;
}

}  // namespace hardycert
