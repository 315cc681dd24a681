// Truncated-domain rectangular grids and the cell/node fields living on them.
// Dimension is a compile-time parameter in 1..4; storage is row-major with
// dimension 0 slowest, so ascending linear order is ascending lexicographic
// multi-index order (ties in reductions resolve to the lowest multi-index).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace hardycert {

enum class Spacing { Log, Linear, Custom };

template <int N>
class Grid {
	static_assert(N >= 1 && N <= 4, "supported dimensions: 1..4");

public:
	explicit Grid(std::array<std::vector<double>, N> axes, Spacing tag = Spacing::Custom)
	    : axes_(std::move(axes)), tag_(tag) {
		for (int d = 0; d < N; ++d) {
			const auto& a = axes_[d];
			if (a.size() < 2) throw std::invalid_argument("grid: axis needs at least 2 nodes");
			if (!(a.front() > 0.0)) throw std::invalid_argument("grid: nodes must be strictly positive");
			for (std::size_t i = 0; i + 1 < a.size(); ++i)
				if (!std::isfinite(a[i + 1]) || !(a[i] < a[i + 1]))
					throw std::invalid_argument("grid: nodes must be finite and strictly increasing");
		}
	}

	static std::shared_ptr<const Grid> log_uniform(double x_min, double x_max, int cells_per_axis) {
		if (!(x_min > 0.0) || !(x_min < x_max)) throw std::invalid_argument("grid: need 0 < x_min < x_max");
		if (cells_per_axis < 1) throw std::invalid_argument("grid: need at least 1 cell");
		std::vector<double> axis(cells_per_axis + 1);
		const double la = std::log(x_min), lb = std::log(x_max);
		for (int i = 0; i <= cells_per_axis; ++i)
			axis[i] = std::exp(la + (lb - la) * double(i) / double(cells_per_axis));
		axis.front() = x_min;
		axis.back() = x_max;
		std::array<std::vector<double>, N> axes;
		for (int d = 0; d < N; ++d) axes[d] = axis;
		return std::make_shared<const Grid>(std::move(axes), Spacing::Log);
	}

	static std::shared_ptr<const Grid> linear_uniform(double x_min, double x_max, int cells_per_axis) {
		if (!(x_min > 0.0) || !(x_min < x_max)) throw std::invalid_argument("grid: need 0 < x_min < x_max");
		if (cells_per_axis < 1) throw std::invalid_argument("grid: need at least 1 cell");
		std::vector<double> axis(cells_per_axis + 1);
		for (int i = 0; i <= cells_per_axis; ++i)
			axis[i] = x_min + (x_max - x_min) * double(i) / double(cells_per_axis);
		std::array<std::vector<double>, N> axes;
		for (int d = 0; d < N; ++d) axes[d] = axis;
		return std::make_shared<const Grid>(std::move(axes), Spacing::Linear);
	}

	Spacing spacing() const { return tag_; }
	int nodes(int d) const { return int(axes_[d].size()); }
	int cells(int d) const { return int(axes_[d].size()) - 1; }
	double node(int d, int i) const { return axes_[d][std::size_t(i)]; }
	double width(int d, int i) const { return axes_[d][std::size_t(i) + 1] - axes_[d][std::size_t(i)]; }
	double mid(int d, int i) const { return 0.5 * (axes_[d][std::size_t(i)] + axes_[d][std::size_t(i) + 1]); }
	const std::vector<double>& axis(int d) const { return axes_[d]; }

	std::array<int, N> cell_extents() const {
		std::array<int, N> e;
		for (int d = 0; d < N; ++d) e[d] = cells(d);
		return e;
	}
	std::array<int, N> node_extents() const {
		std::array<int, N> e;
		for (int d = 0; d < N; ++d) e[d] = nodes(d);
		return e;
	}

	bool same_axes(const Grid& other) const {
		for (int d = 0; d < N; ++d)
			if (axes_[d] != other.axes_[d]) return false;
		return true;
	}

private:
	std::array<std::vector<double>, N> axes_;
	Spacing tag_;
};

template <int N>
using GridPtr = std::shared_ptr<const Grid<N>>;

template <int N>
inline bool same_grid(const GridPtr<N>& a, const GridPtr<N>& b) {
	return a == b || (a && b && a->same_axes(*b));
}

// Row-major strides, dimension 0 slowest.
template <int N>
struct Layout {
	std::array<int, N> extents;
	std::array<std::int64_t, N> strides;
	std::int64_t total;

	explicit Layout(const std::array<int, N>& e) : extents(e) {
		std::int64_t s = 1;
		for (int d = N - 1; d >= 0; --d) {
			strides[std::size_t(d)] = s;
			s *= e[std::size_t(d)];
		}
		total = s;
	}
	std::int64_t linear(const std::array<int, N>& idx) const {
		std::int64_t k = 0;
		for (int d = 0; d < N; ++d) k += strides[std::size_t(d)] * idx[std::size_t(d)];
		return k;
	}
	// Odometer step in lexicographic order; returns false after the last index.
	bool advance(std::array<int, N>& idx) const {
		for (int d = N - 1; d >= 0; --d) {
			if (++idx[std::size_t(d)] < extents[std::size_t(d)]) return true;
			idx[std::size_t(d)] = 0;
		}
		return false;
	}
};

enum class Dir { Lower, Upper };

// One scalar per cell: midpoint sample of a function on the truncated domain.
template <int N>
class CellField {
public:
	CellField() = default;
	CellField(GridPtr<N> g, double fill = 0.0)
	    : grid_(std::move(g)), layout_(grid_->cell_extents()), values_(std::size_t(layout_.total), fill) {}

	const GridPtr<N>& grid() const { return grid_; }
	const Layout<N>& layout() const { return layout_; }
	std::int64_t size() const { return layout_.total; }

	double& operator[](std::int64_t k) { return values_[std::size_t(k)]; }
	double operator[](std::int64_t k) const { return values_[std::size_t(k)]; }
	double& at(const std::array<int, N>& idx) { return values_[std::size_t(layout_.linear(idx))]; }
	double at(const std::array<int, N>& idx) const { return values_[std::size_t(layout_.linear(idx))]; }

	std::vector<double>& data() { return values_; }
	const std::vector<double>& data() const { return values_; }

	double cell_volume(const std::array<int, N>& idx) const {
		double v = 1.0;
		for (int d = 0; d < N; ++d) v *= grid_->width(d, idx[std::size_t(d)]);
		return v;
	}

private:
	GridPtr<N> grid_;
	Layout<N> layout_{std::array<int, N>{}};
	std::vector<double> values_;
};

// One scalar per node: a cumulative integral I_n f (Lower) or I_n* f (Upper).
template <int N>
class NodeField {
public:
	NodeField() = default;
	NodeField(GridPtr<N> g, Dir dir, double fill = 0.0)
	    : grid_(std::move(g)), dir_(dir), layout_(grid_->node_extents()),
	      values_(std::size_t(layout_.total), fill) {}

	const GridPtr<N>& grid() const { return grid_; }
	Dir dir() const { return dir_; }
	const Layout<N>& layout() const { return layout_; }
	std::int64_t size() const { return layout_.total; }

	double& operator[](std::int64_t k) { return values_[std::size_t(k)]; }
	double operator[](std::int64_t k) const { return values_[std::size_t(k)]; }
	double& at(const std::array<int, N>& idx) { return values_[std::size_t(layout_.linear(idx))]; }
	double at(const std::array<int, N>& idx) const { return values_[std::size_t(layout_.linear(idx))]; }

	std::vector<double>& data() { return values_; }
	const std::vector<double>& data() const { return values_; }

private:
	GridPtr<N> grid_;
	Dir dir_ = Dir::Lower;
	Layout<N> layout_{std::array<int, N>{}};
	std::vector<double> values_;
};

}  // namespace hardycert
