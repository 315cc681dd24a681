// Discrete Stieltjes box integrals on 2-d node fields.
//
// The primary form evaluates the integrand at the lower-left node of each
// cell against the forward mixed second difference of the measure field:
//
//   form2 = sum over cells (i,j) of phi[i,j] * D2 psi(i,j),
//   D2 psi(i,j) = psi[i+1,j+1] - psi[i,j+1] - psi[i+1,j] + psi[i,j].
//
// When phi vanishes on the lower-left boundary faces (index 0 in either
// coordinate) and psi vanishes on the upper-right boundary faces (maximal
// index in either coordinate), double Abel summation turns form2 exactly into
//
//   form1 = sum over cells of (phi[i,j+1]-phi[i,j]) * (psi[i,j+1]-psi[i+1,j+1])
//   form3 = sum over cells of psi[i+1,j+1] * D2 phi(i,j)
//
// so the three forms agree to rounding. Mixed differences of powers of
// cumulative fields need not be single-signed; sums are compensated and the
// signed variant reports the negative-contribution share.
#pragma once

#include <cmath>
#include <stdexcept>

#include "grid.hpp"
#include "util.hpp"

namespace hardycert {

inline void require_same_node_grid(const NodeField<2>& a, const NodeField<2>& b) {
	if (!same_grid(a.grid(), b.grid())) throw std::invalid_argument("stieltjes: grid mismatch");
}

// Grouped as a difference of one-axis differences: adjacent node values are
// close, so each inner subtraction is nearly exact.
inline double mixed_second_difference(const NodeField<2>& psi, int i, int j) {
	const auto& lay = psi.layout();
	const std::int64_t s0 = lay.strides[0];
	const double* p = psi.data().data();
	const std::int64_t k = i * s0 + j;
	return (p[k + s0 + 1] - p[k + 1]) - (p[k + s0] - p[k]);
}

inline double stieltjes_box_integral(const NodeField<2>& phi, const NodeField<2>& psi) {
	require_same_node_grid(phi, psi);
	const int mx = phi.grid()->cells(0), my = phi.grid()->cells(1);
	const std::int64_t s0 = phi.layout().strides[0];
	const double* f = phi.data().data();
	const double* p = psi.data().data();
	Accum acc;
	for (int i = 0; i < mx; ++i)
		for (int j = 0; j < my; ++j) {
			const std::int64_t k = i * s0 + j;
			const double d2 = (p[k + s0 + 1] - p[k + 1]) - (p[k + s0] - p[k]);
			acc.add(f[k] * d2);
		}
	return acc.value();
}

inline double stieltjes_form1(const NodeField<2>& phi, const NodeField<2>& psi) {
	require_same_node_grid(phi, psi);
	const int mx = phi.grid()->cells(0), my = phi.grid()->cells(1);
	const std::int64_t s0 = phi.layout().strides[0];
	const double* f = phi.data().data();
	const double* p = psi.data().data();
	Accum acc;
	for (int i = 0; i < mx; ++i)
		for (int j = 0; j < my; ++j) {
			const std::int64_t k = i * s0 + j;
			acc.add((f[k + 1] - f[k]) * (p[k + 1] - p[k + s0 + 1]));
		}
	return acc.value();
}

inline double stieltjes_form3(const NodeField<2>& phi, const NodeField<2>& psi) {
	require_same_node_grid(phi, psi);
	const int mx = phi.grid()->cells(0), my = phi.grid()->cells(1);
	const std::int64_t s0 = phi.layout().strides[0];
	const double* f = phi.data().data();
	const double* p = psi.data().data();
	Accum acc;
	for (int i = 0; i < mx; ++i)
		for (int j = 0; j < my; ++j) {
			const std::int64_t k = i * s0 + j;
			const double d2 = (f[k + s0 + 1] - f[k + 1]) - (f[k + s0] - f[k]);
			acc.add(p[k + s0 + 1] * d2);
		}
	return acc.value();
}

// Corner-mean integrand against the mixed second difference: the trapezoid
// pairing. Second-order accurate for smooth fields where the lower-left rule
// is first-order, and still exactly self-dual under the boundary-vanishing
// hypotheses (summing by parts twice telescopes the corner means the same
// way it telescopes the corner values).
inline double stieltjes_box_integral_trapezoid(const NodeField<2>& phi, const NodeField<2>& psi) {
	require_same_node_grid(phi, psi);
	const int mx = phi.grid()->cells(0), my = phi.grid()->cells(1);
	const std::int64_t s0 = phi.layout().strides[0];
	const double* f = phi.data().data();
	const double* p = psi.data().data();
	Accum acc;
	for (int i = 0; i < mx; ++i)
		for (int j = 0; j < my; ++j) {
			const std::int64_t k = i * s0 + j;
			const double d2 = (p[k + s0 + 1] - p[k + 1]) - (p[k + s0] - p[k]);
			const double fc = 0.25 * (f[k] + f[k + 1] + f[k + s0] + f[k + s0 + 1]);
			acc.add(fc * d2);
		}
	return acc.value();
}

struct SignedStieltjes {
	double value = 0.0;
	double positive_mass = 0.0;  // sum of positive contributions
	double negative_mass = 0.0;  // absolute sum of negative contributions

	double negative_fraction() const {
		const double total = positive_mass + negative_mass;
		return total > 0.0 ? negative_mass / total : 0.0;
	}
};

// form2 with per-term sign bookkeeping; terms with non-finite integrand are
// rejected (callers apply their degeneracy conventions before powering).
inline SignedStieltjes stieltjes_signed(const NodeField<2>& phi, const NodeField<2>& psi) {
	require_same_node_grid(phi, psi);
	const int mx = phi.grid()->cells(0), my = phi.grid()->cells(1);
	const std::int64_t s0 = phi.layout().strides[0];
	const double* f = phi.data().data();
	const double* p = psi.data().data();
	Accum acc, pos, neg;
	for (int i = 0; i < mx; ++i)
		for (int j = 0; j < my; ++j) {
			const std::int64_t k = i * s0 + j;
			const double d2 = (p[k + s0 + 1] - p[k + 1]) - (p[k + s0] - p[k]);
			const double term = f[k] * d2;
			if (!std::isfinite(term)) throw std::domain_error("stieltjes: non-finite contribution");
			acc.add(term);
			if (term >= 0.0) pos.add(term); else neg.add(-term);
		}
	SignedStieltjes out;
	out.value = acc.value();
	out.positive_mass = pos.value();
	out.negative_mass = neg.value();
	return out;
}

}  // namespace hardycert
