// Small numeric helpers shared across the library: compensated summation,
// deterministic RNG, and fixed-precision number formatting.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace hardycert {

// Neumaier compensated accumulator. The running compensation keeps long
// reductions accurate to a few ulp independent of summation order.
struct Accum {
	double sum = 0.0;
	double comp = 0.0;

	void add(double x) {
		const double t = sum + x;
		if (std::fabs(sum) >= std::fabs(x))
			comp += (sum - t) + x;
		else
			comp += (x - t) + sum;
		sum = t;
	}
	double value() const { return sum + comp; }
};

// splitmix64: tiny deterministic generator, stable across platforms.
// Used both directly and to derive per-instance seeds.
struct Rng {
	std::uint64_t state;

	explicit Rng(std::uint64_t seed) : state(seed) {}

	std::uint64_t next_u64() {
		std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
		z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
		z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
		return z ^ (z >> 31);
	}
	// uniform in [0, 1)
	double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }
	// uniform in [lo, hi)
	double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
	// uniform integer in [0, n)
	std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }
};

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
	Rng r(base ^ (0x6a09e667f3bcc909ull + index * 0x9e3779b97f4a7c15ull));
	return r.next_u64();
}

// 17 significant digits: enough to round-trip any double, fixed for
// byte-identical report output.
inline std::string fmt17(double x) {
	char buf[64];
	std::snprintf(buf, sizeof(buf), "%.17g", x);
	return std::string(buf);
}

}  // namespace hardycert
