// Norm exponents p, q with their conjugates, the auxiliary index r defined by
// 1/r = 1/q - 1/p, and the zone classification used throughout:
//   p < q, the diagonal p = q, and q < p with sub-zones keyed by the flags
//   r/p >= 1 and r/q' >= 1.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace hardycert {

enum class Zone { PLessQ, Diagonal, QLessP };

inline const char* zone_name(Zone z) {
	switch (z) {
		case Zone::PLessQ: return "p<q";
		case Zone::Diagonal: return "p=q";
		case Zone::QLessP: return "q<p";
	}
	return "?";
}

struct Exponents {
	double p = 2.0, q = 2.0;
	double p_conj = 2.0, q_conj = 2.0;  // p' = p/(p-1), q' = q/(q-1)
	bool has_r = false;
	double r = 0.0;  // 1/r = 1/q - 1/p; positive exactly when q < p
	Zone zone = Zone::Diagonal;
	bool r_over_p_ge1 = false;      // q<p only
	bool r_over_qconj_ge1 = false;  // q<p only

	static Exponents make(double p, double q) {
		if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponents: p must satisfy 1 < p < inf");
		if (!(q > 1.0) || !std::isfinite(q)) throw std::invalid_argument("exponents: q must satisfy 1 < q < inf");
		Exponents e;
		e.p = p;
		e.q = q;
		e.p_conj = p / (p - 1.0);
		e.q_conj = q / (q - 1.0);
		e.has_r = (p != q);
		if (e.has_r) e.r = 1.0 / (1.0 / q - 1.0 / p);
		e.zone = (p < q) ? Zone::PLessQ : (q < p ? Zone::QLessP : Zone::Diagonal);
		if (e.zone == Zone::QLessP) {
			e.r_over_p_ge1 = (e.r / p >= 1.0);
			e.r_over_qconj_ge1 = (e.r / e.q_conj >= 1.0);
		}
		return e;
	}

	// Swaps the operator side for duality arguments: (p,q) -> (q',p').
	Exponents conjugate_pair() const { return make(q_conj, p_conj); }
};

}  // namespace hardycert
