// Prefix/suffix cumulative fields (summed-area tables) over cell samples,
// their exact midpoint queries, and weighted L^p reductions.
//
// Quadrature convention everywhere: a cell contributes value(midpoint) x
// cell volume. Under this convention prefix and suffix cumulation are exact
// discrete adjoints, and the cumulative integral restricted to one cell is
// multilinear, so its value at the cell center equals the mean of its 2^N
// corner node values.
#pragma once

#include <cmath>
#include <stdexcept>

#include "grid.hpp"
#include "util.hpp"

namespace hardycert {

namespace detail {

// In-place running sum along one axis of a cell-shaped array.
template <int N>
inline void axis_prefix(std::vector<double>& a, const Layout<N>& lay, int d) {
	auto outer = lay.extents;
	outer[std::size_t(d)] = 1;
	Layout<N> olay(outer);
	std::array<int, N> idx{};
	const std::int64_t stride = lay.strides[std::size_t(d)];
	const int n = lay.extents[std::size_t(d)];
	do {
		const std::int64_t base = lay.linear(idx);
		for (int i = 1; i < n; ++i)
			a[std::size_t(base + i * stride)] += a[std::size_t(base + (i - 1) * stride)];
	} while (olay.advance(idx));
}

template <int N>
inline void axis_suffix(std::vector<double>& a, const Layout<N>& lay, int d) {
	auto outer = lay.extents;
	outer[std::size_t(d)] = 1;
	Layout<N> olay(outer);
	std::array<int, N> idx{};
	const std::int64_t stride = lay.strides[std::size_t(d)];
	const int n = lay.extents[std::size_t(d)];
	do {
		const std::int64_t base = lay.linear(idx);
		for (int i = n - 2; i >= 0; --i)
			a[std::size_t(base + i * stride)] += a[std::size_t(base + (i + 1) * stride)];
	} while (olay.advance(idx));
}

template <int N>
inline void check_finite(const CellField<N>& f) {
	std::array<int, N> idx{};
	const Layout<N>& lay = f.layout();
	if (lay.total == 0) return;
	do {
		if (!std::isfinite(f.at(idx))) {
			std::string where = "(";
			for (int d = 0; d < N; ++d) where += std::to_string(idx[std::size_t(d)]) + (d + 1 < N ? "," : ")");
			throw std::invalid_argument("cumulate: non-finite sample at cell " + where);
		}
	} while (lay.advance(idx));
}

}  // namespace detail

// Node value at multi-index k: integral of f over the box below node k,
// i.e. the sum of value x volume over all cells with every index < k_d.
// Zero on every face with some k_d = 0.
template <int N>
inline NodeField<N> prefix_cumulate(const CellField<N>& f) {
	detail::check_finite(f);
	const Layout<N>& clay = f.layout();
	std::vector<double> s(f.data());
	{
		std::array<int, N> idx{};
		if (clay.total > 0) do {
			s[std::size_t(clay.linear(idx))] *= f.cell_volume(idx);
		} while (clay.advance(idx));
	}
	for (int d = 0; d < N; ++d) detail::axis_prefix<N>(s, clay, d);

	NodeField<N> out(f.grid(), Dir::Lower, 0.0);
	const Layout<N>& nlay = out.layout();
	std::array<int, N> k{};
	do {
		bool face = false;
		std::array<int, N> c{};
		for (int d = 0; d < N; ++d) {
			if (k[std::size_t(d)] == 0) { face = true; break; }
			c[std::size_t(d)] = k[std::size_t(d)] - 1;
		}
		if (!face) out.at(k) = s[std::size_t(clay.linear(c))];
	} while (nlay.advance(k));
	return out;
}

// Node value at k: integral of f over the box above node k (all cells with
// every index >= k_d). Zero on every face with some k_d maximal.
template <int N>
inline NodeField<N> suffix_cumulate(const CellField<N>& f) {
	detail::check_finite(f);
	const Layout<N>& clay = f.layout();
	std::vector<double> s(f.data());
	{
		std::array<int, N> idx{};
		if (clay.total > 0) do {
			s[std::size_t(clay.linear(idx))] *= f.cell_volume(idx);
		} while (clay.advance(idx));
	}
	for (int d = 0; d < N; ++d) detail::axis_suffix<N>(s, clay, d);

	NodeField<N> out(f.grid(), Dir::Upper, 0.0);
	const Layout<N>& nlay = out.layout();
	std::array<int, N> k{};
	do {
		bool face = false;
		for (int d = 0; d < N; ++d)
			if (k[std::size_t(d)] == clay.extents[std::size_t(d)]) { face = true; break; }
		if (!face) out.at(k) = s[std::size_t(clay.linear(k))];
	} while (nlay.advance(k));
	return out;
}

// Exact value of the cumulative field at each cell center: the cumulative
// integral is multilinear inside a cell, so the center value is the mean of
// the 2^N corner node values.
template <int N>
inline CellField<N> cell_center_values(const NodeField<N>& u) {
	CellField<N> out(u.grid(), 0.0);
	const Layout<N>& clay = out.layout();
	std::array<int, N> c{};
	const double scale = 1.0 / double(1 << N);
	if (clay.total == 0) return out;
	do {
		double acc = 0.0;
		for (int corner = 0; corner < (1 << N); ++corner) {
			std::array<int, N> k = c;
			for (int d = 0; d < N; ++d)
				if (corner & (1 << d)) ++k[std::size_t(d)];
			acc += u.at(k);
		}
		out.at(c) = acc * scale;
	} while (clay.advance(c));
	return out;
}

// (sum |f|^exponent x weight x volume)^{1/exponent}
template <int N>
inline double weighted_norm(const CellField<N>& f, const CellField<N>& wt, double exponent) {
	if (!same_grid(f.grid(), wt.grid())) throw std::invalid_argument("weighted_norm: grid mismatch");
	if (!(exponent > 0.0)) throw std::invalid_argument("weighted_norm: exponent must be positive");
	Accum acc;
	const Layout<N>& lay = f.layout();
	std::array<int, N> idx{};
	if (lay.total == 0) return 0.0;
	do {
		const double fv = std::fabs(f.at(idx));
		if (fv > 0.0) acc.add(std::pow(fv, exponent) * wt.at(idx) * f.cell_volume(idx));
	} while (lay.advance(idx));
	return std::pow(acc.value(), 1.0 / exponent);
}

// Plain weighted integral sum f x weight x volume (no exponent, no root).
template <int N>
inline double weighted_integral(const CellField<N>& f, const CellField<N>& wt) {
	if (!same_grid(f.grid(), wt.grid())) throw std::invalid_argument("weighted_integral: grid mismatch");
	Accum acc;
	const Layout<N>& lay = f.layout();
	std::array<int, N> idx{};
	if (lay.total == 0) return 0.0;
	do {
		acc.add(f.at(idx) * wt.at(idx) * f.cell_volume(idx));
	} while (lay.advance(idx));
	return acc.value();
}

}  // namespace hardycert
