// Batch front door used by the command-line tool: JSON run configurations,
// assembly of bounds reports (functionals, constants, chained bounds, norm
// estimate, certified interval, warnings), self-check suites, and parameter
// sweeps emitted as CSV. All numeric output is fixed at 17 significant digits
// so identical inputs produce byte-identical reports.
#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "hardycert/multidim.hpp"
#include "hardycert/normest.hpp"
#include "hardycert/verify.hpp"

namespace hardycert {

// Invalid configuration input; carries the offending field's name.
class ConfigError : public std::runtime_error {
 public:
	ConfigError(std::string field, const std::string& message)
	    : std::runtime_error(message), field_(std::move(field)) {}
	const std::string& field() const { return field_; }

 private:
	std::string field_;
};

namespace cfg {

[[noreturn]] inline void fail(const std::string& field, const std::string& message) {
	throw ConfigError(field, message);
}

using njson = nlohmann::json;

inline double need_number(const njson& j, const std::string& field) {
	if (!j.is_number()) fail(field, "must be a number");
	const double x = j.get<double>();
	if (!std::isfinite(x)) fail(field, "must be finite");
	return x;
}

inline long long need_integer(const njson& j, const std::string& field) {
	if (!j.is_number_integer()) fail(field, "must be an integer");
	return j.get<long long>();
}

inline std::string need_string(const njson& j, const std::string& field) {
	if (!j.is_string()) fail(field, "must be a string");
	return j.get<std::string>();
}

inline std::vector<double> need_number_array(const njson& j, const std::string& field) {
	if (!j.is_array()) fail(field, "must be an array of numbers");
	std::vector<double> out;
	out.reserve(j.size());
	for (const auto& x : j) out.push_back(need_number(x, field));
	return out;
}

inline void reject_unknown_keys(const njson& j, const std::string& where,
                                std::initializer_list<const char*> allowed) {
	for (const auto& item : j.items()) {
		bool known = false;
		for (const char* k : allowed)
			if (item.key() == k) {
				known = true;
				break;
			}
		if (!known) fail(where.empty() ? item.key() : where + "." + item.key(), "unknown field");
	}
}

}  // namespace cfg

struct GridSpec {
	double x_min = 1e-3, x_max = 1e3;
	int nodes_per_axis = 65;  // grid nodes per axis; cells per axis is one less
	std::string spacing = "log";
};

// Grid-independent weight descriptor as it appears in a configuration file;
// instantiated onto a concrete grid and dimension on demand.
struct WeightSpec {
	WeightKind kind = WeightKind::Power;
	double c = 1.0;
	std::vector<double> expo;
	std::vector<PiecewisePower> factors;
	std::vector<double> table_values;

	bool factorizable() const { return kind != WeightKind::Table; }

	template <int N>
	Weight<N> instantiate(const std::string& field, const GridPtr<N>& g) const {
		try {
			switch (kind) {
				case WeightKind::Power: {
					if (expo.size() != std::size_t(N))
						cfg::fail(field, "power exponents must list one entry per dimension");
					std::array<double, N> a{};
					for (int d = 0; d < N; ++d) a[std::size_t(d)] = expo[std::size_t(d)];
					return Weight<N>::power(c, a);
				}
				case WeightKind::Factorized: {
					if (factors.size() != std::size_t(N))
						cfg::fail(field, "factorized weights need one factor per dimension");
					std::array<PiecewisePower, N> fs{};
					for (int d = 0; d < N; ++d) fs[std::size_t(d)] = factors[std::size_t(d)];
					return Weight<N>::factorized(std::move(fs));
				}
				case WeightKind::Table: {
					if constexpr (N != 2) {
						cfg::fail(field, "table weights require dims = 2");
					} else {
						std::int64_t cells = 1;
						for (int d = 0; d < 2; ++d) cells *= g->cells(d);
						if (std::int64_t(table_values.size()) != cells)
							cfg::fail(field, "table needs one value per grid cell (first coordinate slowest)");
						CellField<2> t(g);
						for (std::int64_t k = 0; k < cells; ++k) t[k] = table_values[std::size_t(k)];
						return Weight<2>::from_table(std::move(t));
					}
				}
			}
		} catch (const ConfigError&) {
			throw;
		} catch (const std::exception& ex) {
			cfg::fail(field, ex.what());
		}
		cfg::fail(field, "unknown weight kind");
	}

	static WeightSpec from_json(const cfg::njson& j, const std::string& field) {
		if (!j.is_object()) cfg::fail(field, "must be an object");
		WeightSpec spec;
		const std::string kind = cfg::need_string(j.value("kind", cfg::njson("power")), field + ".kind");
		if (kind == "power") {
			cfg::reject_unknown_keys(j, field, {"kind", "c", "exponents"});
			spec.kind = WeightKind::Power;
			spec.c = j.contains("c") ? cfg::need_number(j.at("c"), field + ".c") : 1.0;
			if (!(spec.c > 0.0)) cfg::fail(field + ".c", "must be positive");
			if (!j.contains("exponents")) cfg::fail(field + ".exponents", "required for power weights");
			spec.expo = cfg::need_number_array(j.at("exponents"), field + ".exponents");
		} else if (kind == "factorized") {
			cfg::reject_unknown_keys(j, field, {"kind", "factors"});
			spec.kind = WeightKind::Factorized;
			if (!j.contains("factors") || !j.at("factors").is_array())
				cfg::fail(field + ".factors", "must be an array of piecewise factors");
			for (const auto& fj : j.at("factors")) {
				const std::string ffield = field + ".factors";
				if (!fj.is_object()) cfg::fail(ffield, "each factor must be an object");
				cfg::reject_unknown_keys(fj, ffield, {"edges", "coef", "expo"});
				PiecewisePower pw;
				if (fj.contains("edges")) pw.edges = cfg::need_number_array(fj.at("edges"), ffield + ".edges");
				if (fj.contains("coef")) pw.coef = cfg::need_number_array(fj.at("coef"), ffield + ".coef");
				if (fj.contains("expo")) pw.expo = cfg::need_number_array(fj.at("expo"), ffield + ".expo");
				try {
					pw.validate();
				} catch (const std::exception& ex) {
					cfg::fail(ffield, ex.what());
				}
				spec.factors.push_back(std::move(pw));
			}
		} else if (kind == "table") {
			cfg::reject_unknown_keys(j, field, {"kind", "values"});
			spec.kind = WeightKind::Table;
			if (!j.contains("values")) cfg::fail(field + ".values", "required for table weights");
			spec.table_values = cfg::need_number_array(j.at("values"), field + ".values");
			for (double x : spec.table_values)
				if (!(x >= 0.0)) cfg::fail(field + ".values", "entries must be nonnegative");
		} else {
			cfg::fail(field + ".kind", "must be one of power, factorized, table");
		}
		return spec;
	}
};

struct RunConfig {
	WeightSpec weight_v, weight_w;
	double p = 2.0, q = 2.0;
	int dims = 2;
	GridSpec grid;
	long long iters = 500;
	double tol = 1e-9;
	std::uint64_t seed = 0;
	int starts = 0;  // additional random positive starts beyond the structured ones
	std::vector<double> deltas;
	std::optional<double> s1, s2;
	std::optional<std::vector<std::string>> functionals;  // request filter; absent = zone defaults
	std::string p_range, q_range;                         // sweeps only, "start:stop:step"

	void validate() const {
		if (!(p > 1.0) || !std::isfinite(p)) cfg::fail("p", "must satisfy 1 < p < inf");
		if (!(q > 1.0) || !std::isfinite(q)) cfg::fail("q", "must satisfy 1 < q < inf");
		if (dims < 1 || dims > 4) cfg::fail("dims", "must lie in 1..4");
		if (!(grid.x_min > 0.0) || !std::isfinite(grid.x_min))
			cfg::fail("grid.x_min", "must be positive and finite");
		if (!(grid.x_min < grid.x_max) || !std::isfinite(grid.x_max))
			cfg::fail("grid.x_max", "must be finite and exceed x_min");
		if (grid.nodes_per_axis < 8) cfg::fail("grid.nodes_per_axis", "must be at least 8");
		if (grid.spacing != "log" && grid.spacing != "linear")
			cfg::fail("grid.spacing", "must be log or linear");
		if (iters < 1) cfg::fail("iters", "must be at least 1");
		if (!(tol > 0.0) || !std::isfinite(tol)) cfg::fail("tol", "must be positive");
		if (starts < 0) cfg::fail("starts", "must be nonnegative");
		for (std::size_t k = 0; k < deltas.size(); ++k) {
			if (!(deltas[k] > 0.0) || !(p - deltas[k] > 1.0))
				cfg::fail("deltas", "each delta must satisfy 0 < delta < p - 1");
			if (k > 0 && !(deltas[k] < deltas[k - 1])) cfg::fail("deltas", "must strictly decrease");
		}
		if (s1.has_value() != s2.has_value()) cfg::fail("s1", "s1 and s2 must be given together");
		if (s1 && (!(*s1 > 1.0) || !(*s1 < p))) cfg::fail("s1", "must lie in (1, p)");
		if (s2 && (!(*s2 > 1.0) || !(*s2 < p))) cfg::fail("s2", "must lie in (1, p)");
	}

	template <int N>
	GridPtr<N> make_grid() const {
		const int cells = grid.nodes_per_axis - 1;
		return grid.spacing == "log" ? Grid<N>::log_uniform(grid.x_min, grid.x_max, cells)
		                             : Grid<N>::linear_uniform(grid.x_min, grid.x_max, cells);
	}

	static RunConfig from_json(const cfg::njson& j);
	static RunConfig from_text(const std::string& text) {
		cfg::njson j;
		try {
			j = cfg::njson::parse(text);
		} catch (const std::exception& ex) {
			cfg::fail("json", ex.what());
		}
		return from_json(j);
	}
};

// Canonical identifier for one functional at a given dimension; the generic
// spellings with a literal n are accepted and pinned to the configured dims.
inline std::string canonical_functional_name(const std::string& name, int dims) {
	static const char* generic[] = {"AMn", "ATn", "AMn*", "ATn*", "BMRn", "BPSn", "BMRn*", "BPSn*"};
	for (const char* gname : generic)
		if (name == gname) {
			std::string s(gname);
			const std::size_t at = s.find('n');
			return s.substr(0, at) + std::to_string(dims) + s.substr(at + 1);
		}
	return name;
}

inline std::vector<std::string> known_functional_names(int dims) {
	const std::string n = std::to_string(dims);
	return {"A1",     "A2",     "A3",      "B1",      "B2",       "B3",
	        "Bv",     "Bw",     "AW",      "AM" + n,  "AT" + n,   "AM" + n + "*",
	        "AT" + n + "*",     "BMR" + n, "BPS" + n, "BMR" + n + "*", "BPS" + n + "*"};
}

inline RunConfig RunConfig::from_json(const cfg::njson& j) {
	if (!j.is_object()) cfg::fail("json", "configuration must be a JSON object");
	cfg::reject_unknown_keys(j, "", {"weight_v", "weight_w", "p", "q", "dims", "grid", "iters",
	                                 "starts", "tol", "seed", "deltas", "s1", "s2", "functionals",
	                                 "p_range", "q_range"});
	RunConfig c;
	if (!j.contains("p")) cfg::fail("p", "required");
	c.p = cfg::need_number(j.at("p"), "p");
	if (!(c.p > 1.0)) cfg::fail("p", "must satisfy 1 < p < inf");
	if (!j.contains("q")) cfg::fail("q", "required");
	c.q = cfg::need_number(j.at("q"), "q");
	if (!(c.q > 1.0)) cfg::fail("q", "must satisfy 1 < q < inf");
	if (j.contains("dims")) c.dims = int(cfg::need_integer(j.at("dims"), "dims"));

	if (j.contains("grid")) {
		const auto& gj = j.at("grid");
		if (!gj.is_object()) cfg::fail("grid", "must be an object");
		cfg::reject_unknown_keys(gj, "grid", {"x_min", "x_max", "nodes_per_axis", "spacing"});
		if (gj.contains("x_min")) c.grid.x_min = cfg::need_number(gj.at("x_min"), "grid.x_min");
		if (gj.contains("x_max")) c.grid.x_max = cfg::need_number(gj.at("x_max"), "grid.x_max");
		if (gj.contains("nodes_per_axis"))
			c.grid.nodes_per_axis = int(cfg::need_integer(gj.at("nodes_per_axis"), "grid.nodes_per_axis"));
		if (gj.contains("spacing")) c.grid.spacing = cfg::need_string(gj.at("spacing"), "grid.spacing");
	}

	if (!j.contains("weight_v")) cfg::fail("weight_v", "required");
	c.weight_v = WeightSpec::from_json(j.at("weight_v"), "weight_v");
	if (!j.contains("weight_w")) cfg::fail("weight_w", "required");
	c.weight_w = WeightSpec::from_json(j.at("weight_w"), "weight_w");

	if (j.contains("iters")) c.iters = cfg::need_integer(j.at("iters"), "iters");
	if (j.contains("starts")) c.starts = int(cfg::need_integer(j.at("starts"), "starts"));
	if (j.contains("tol")) c.tol = cfg::need_number(j.at("tol"), "tol");
	if (j.contains("seed")) {
		const auto& sj = j.at("seed");
		if (!sj.is_number_unsigned()) cfg::fail("seed", "must be a nonnegative integer");
		c.seed = sj.get<std::uint64_t>();
	}
	if (j.contains("deltas")) c.deltas = cfg::need_number_array(j.at("deltas"), "deltas");
	if (j.contains("s1")) c.s1 = cfg::need_number(j.at("s1"), "s1");
	if (j.contains("s2")) c.s2 = cfg::need_number(j.at("s2"), "s2");
	if (j.contains("functionals")) {
		const auto& fj = j.at("functionals");
		if (!fj.is_array()) cfg::fail("functionals", "must be an array of functional names");
		std::vector<std::string> names;
		const auto known = known_functional_names(c.dims);
		for (const auto& nj : fj) {
			std::string n = canonical_functional_name(cfg::need_string(nj, "functionals"), c.dims);
			bool ok = false;
			for (const auto& k : known)
				if (k == n) {
					ok = true;
					break;
				}
			if (!ok) cfg::fail("functionals", "unknown functional name: " + n);
			names.push_back(std::move(n));
		}
		c.functionals = std::move(names);
	}
	if (j.contains("p_range")) c.p_range = cfg::need_string(j.at("p_range"), "p_range");
	if (j.contains("q_range")) c.q_range = cfg::need_string(j.at("q_range"), "q_range");
	c.validate();
	return c;
}

// Deterministic JSON emitter: fixed key order by construction, every number
// rendered at 17 significant digits, two-space indentation.
class JsonWriter {
 public:
	std::string take() {
		str_ += '\n';
		return std::move(str_);
	}

	void begin_object() { open("{", nullptr); }
	void begin_object(const char* key) { open("{", key); }
	void end_object() { close('}'); }
	void begin_array(const char* key) { open("[", key); }
	void end_array() { close(']'); }

	void field(const char* key, const std::string& v) { entry(key, quote(v)); }
	void field(const char* key, const char* v) { entry(key, quote(v)); }
	void field(const char* key, double v) { entry(key, num(v)); }
	void field(const char* key, bool v) { entry(key, v ? "true" : "false"); }
	void field(const char* key, long long v) { entry(key, std::to_string(v)); }
	void field(const char* key, int v) { entry(key, std::to_string(v)); }
	void item(double v) { entry(nullptr, num(v)); }
	void item(int v) { entry(nullptr, std::to_string(v)); }
	void item(const std::string& v) { entry(nullptr, quote(v)); }

 private:
	struct Level {
		bool first = true;
	};
	std::string str_;
	std::vector<Level> stack_;

	static std::string num(double v) {
		if (!std::isfinite(v)) throw std::domain_error("report: non-finite value");
		return fmt17(v);
	}
	static std::string quote(const std::string& s) {
		std::string out = "\"";
		for (char ch : s) {
			switch (ch) {
				case '"': out += "\\\""; break;
				case '\\': out += "\\\\"; break;
				case '\n': out += "\\n"; break;
				case '\t': out += "\\t"; break;
				default:
					if (static_cast<unsigned char>(ch) < 0x20) {
						char buf[8];
						std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
						out += buf;
					} else {
						out += ch;
					}
			}
		}
		out += '"';
		return out;
	}
	void pad() { str_.append(2 * stack_.size(), ' '); }
	void pre() {
		if (stack_.empty()) return;
		if (!stack_.back().first) str_ += ',';
		stack_.back().first = false;
		str_ += '\n';
		pad();
	}
	void open(const char* brace, const char* key) {
		pre();
		if (key) str_ += quote(key) + ": ";
		str_ += brace;
		stack_.push_back({});
	}
	void close(char brace) {
		const bool empty = stack_.back().first;
		stack_.pop_back();
		if (!empty) {
			str_ += '\n';
			pad();
		}
		str_ += brace;
	}
	void entry(const char* key, const std::string& rendered) {
		pre();
		if (key) str_ += quote(key) + ": ";
		str_ += rendered;
	}
};

struct EstimateSummary {
	double value = 0.0;
	double probe_lower = 0.0;
	bool converged = false;
	long long iterations = 0;
	int best_start = -1;
};

struct BoundsReport {
	int dims = 2;
	Exponents exps;
	ConstantSet consts;
	std::vector<FunctionalValue> functionals;
	ZoneChainReport chains;
	std::optional<EstimateSummary> estimate;
	std::optional<std::array<double, 2>> certified;  // lo, hi
	std::vector<std::string> warnings;
	bool checks_pass = true;
};

namespace report_detail {

inline const FunctionalValue* find(const std::vector<FunctionalValue>& fs, const std::string& name) {
	for (const auto& f : fs)
		if (f.name == name) return &f;
	return nullptr;
}

inline std::string percent1(double frac) {
	char buf[32];
	std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * frac);
	return std::string(buf);
}

// Why `name` cannot be computed under this configuration; nullptr if it can.
template <int N>
const char* unavailable_reason(const std::string& name, const RunConfig& c, const Exponents& e,
                               bool v_fact, bool w_fact) {
	const bool a_family = name == "A1" || name == "A2" || name == "A3";
	const bool b_family = name == "B1" || name == "B2" || name == "B3" || name == "Bv" || name == "Bw";
	if (a_family || b_family || name == "AW") {
		if (N != 2) return "requires dims = 2";
		if (b_family && e.zone != Zone::QLessP) return "requires q < p";
		if (name == "AW") {
			if (e.zone == Zone::QLessP) return "requires p <= q";
			if (!c.s1 || !c.s2) return "requires s1 and s2";
			if (!v_fact) return "requires a factorizable weight_v";
		}
		return nullptr;
	}
	const bool starred = !name.empty() && name.back() == '*';
	const bool reduction = name.rfind("BMR", 0) == 0 || name.rfind("BPS", 0) == 0;
	if (reduction && e.zone != Zone::QLessP) return "requires q < p";
	if (starred && !w_fact) return "requires a factorizable weight_w";
	if (!starred && !v_fact) return "requires a factorizable weight_v";
	return nullptr;
}

template <int N>
std::vector<std::string> default_functionals(const RunConfig& c, const Exponents& e, bool v_fact,
                                             bool w_fact) {
	const std::string n = std::to_string(N);
	std::vector<std::string> out;
	if constexpr (N == 2) {
		out.push_back("A1");
		if (e.zone != Zone::QLessP) {
			out.push_back("A2");
			out.push_back("A3");
		} else {
			for (const char* b : {"B1", "B2", "B3", "Bv", "Bw"}) out.push_back(b);
		}
		if (e.zone != Zone::QLessP && c.s1 && c.s2 && v_fact) out.push_back("AW");
	}
	if (v_fact) {
		out.push_back("AM" + n);
		out.push_back("AT" + n);
	}
	if (w_fact) {
		out.push_back("AM" + n + "*");
		out.push_back("AT" + n + "*");
	}
	if (e.zone == Zone::QLessP) {
		if (v_fact) {
			out.push_back("BMR" + n);
			out.push_back("BPS" + n);
		}
		if (w_fact) {
			out.push_back("BMR" + n + "*");
			out.push_back("BPS" + n + "*");
		}
	}
	return out;
}

// Evaluates the selected functionals on one grid, in canonical order.
template <int N>
std::vector<FunctionalValue> collect_functionals(const RunConfig& c, const Exponents& e,
                                                 const Weight<N>& v, const Weight<N>& w,
                                                 const GridPtr<N>& g,
                                                 const std::vector<std::string>& selected,
                                                 std::vector<std::string>* warnings) {
	std::vector<FunctionalValue> out;
	const bool v_fact = v.factorizable(), w_fact = w.factorizable();
	auto selected_has = [&](const std::string& n) {
		for (const auto& s : selected)
			if (s == n) return true;
		return false;
	};

	[[maybe_unused]] std::optional<ConfigFields> fields;
	const std::string n = std::to_string(N);
	for (const std::string& name : known_functional_names(N)) {
		if (!selected_has(name)) continue;
		if (const char* why = unavailable_reason<N>(name, c, e, v_fact, w_fact)) {
			if (warnings) warnings->push_back(name + ": " + why + "; omitted");
			continue;
		}
		if constexpr (N == 2) {
			const bool needs_fields = name == "A1" || name == "A2" || name == "A3" || name == "B1" ||
			                          name == "B2" || name == "B3" || name == "Bv" || name == "Bw";
			if (needs_fields && !fields) fields.emplace(ConfigFields::make(v, w, g, e));
			if (name == "A1") out.push_back(a_functional(AFunc::A1, *fields, e));
			else if (name == "A2") out.push_back(a_functional(AFunc::A2, *fields, e));
			else if (name == "A3") out.push_back(a_functional(AFunc::A3, *fields, e));
			else if (name == "B1") out.push_back(b_functional(BFunc::B1, *fields, e));
			else if (name == "B2") out.push_back(b_functional(BFunc::B2, *fields, e));
			else if (name == "B3") out.push_back(b_functional(BFunc::B3, *fields, e));
			else if (name == "Bv") out.push_back(bv_functional(BvFunc::Bv, *fields, e));
			else if (name == "Bw") out.push_back(bv_functional(BvFunc::Bw, *fields, e));
			else if (name == "AW")
				out.push_back(multidim_functional<2>(MultiFunc::AW, v, w, g, e,
				                                     std::array<double, 2>{*c.s1, *c.s2}));
			if (needs_fields || name == "AW") continue;
		}
		if (name == "AM" + n) out.push_back(multidim_functional<N>(MultiFunc::AMn, v, w, g, e));
		else if (name == "AT" + n) out.push_back(multidim_functional<N>(MultiFunc::ATn, v, w, g, e));
		else if (name == "AM" + n + "*")
			out.push_back(multidim_functional<N>(MultiFunc::AMnStar, v, w, g, e));
		else if (name == "AT" + n + "*")
			out.push_back(multidim_functional<N>(MultiFunc::ATnStar, v, w, g, e));
		else if (name == "BMR" + n) out.push_back(multidim_functional<N>(MultiFunc::BMRn, v, w, g, e));
		else if (name == "BPS" + n) out.push_back(multidim_functional<N>(MultiFunc::BPSn, v, w, g, e));
		else if (name == "BMR" + n + "*")
			out.push_back(multidim_functional<N>(MultiFunc::BMRnStar, v, w, g, e));
		else if (name == "BPS" + n + "*")
			out.push_back(multidim_functional<N>(MultiFunc::BPSnStar, v, w, g, e));
	}
	return out;
}

}  // namespace report_detail

// Theorem-backed certified interval around the best constant, assembled from
// the zone's lower-bound factor and the minimum of its upper-bound routes.
struct Interval {
	double lo = 0.0, hi = 0.0;
};

inline Interval certified_interval(const ConfigFields& f, const Exponents& e, const ConstantSet& c,
                                   double probe_lower) {
	Interval out;
	if (e.zone == Zone::QLessP) {
		const double b1 = b_functional(BFunc::B1, f, e).value;
		out.lo = std::max(probe_lower, c.c_lower * b1);
		double route = b1;
		if (c.b_zone == 1 || c.b_zone == 2) route += b_functional(BFunc::B2, f, e).value;
		if (c.b_zone == 1 || c.b_zone == 3) route += b_functional(BFunc::B3, f, e).value;
		out.hi = std::min(*c.C_upper * b1, c.C_sum * route);
	} else {
		const double a1 = a_functional(AFunc::A1, f, e).value;
		const double sum = a1 + a_functional(AFunc::A2, f, e).value + a_functional(AFunc::A3, f, e).value;
		out.lo = std::max(probe_lower, c.c_lower * a1);
		out.hi = c.C_sum * sum;
		if (c.C_upper) out.hi = std::min(out.hi, *c.C_upper * a1);
	}
	return out;
}

// Extra random positive ascent starts derived from the configuration seed.
inline std::vector<CellField<2>> random_starts(const RunConfig& c, const GridPtr<2>& g) {
	std::vector<CellField<2>> out;
	for (int s = 0; s < c.starts; ++s) {
		Rng rng(derive_seed(c.seed, 1000 + std::uint64_t(s)));
		CellField<2> f(g);
		for (std::int64_t k = 0; k < f.size(); ++k) f[k] = -std::log1p(-rng.next_double());
		out.push_back(std::move(f));
	}
	return out;
}

template <int N>
BoundsReport assemble_report_impl(const RunConfig& c, bool with_norm) {
	BoundsReport rep;
	rep.dims = N;
	const Exponents e = Exponents::make(c.p, c.q);
	rep.exps = e;
	rep.consts = constants(e);

	const GridPtr<N> g = c.make_grid<N>();
	const Weight<N> v = c.weight_v.instantiate<N>("weight_v", g);
	const Weight<N> w = c.weight_w.instantiate<N>("weight_w", g);
	const bool v_fact = v.factorizable(), w_fact = w.factorizable();

	std::vector<std::string> selected =
	    c.functionals ? *c.functionals
	                  : report_detail::default_functionals<N>(c, e, v_fact, w_fact);
	rep.functionals =
	    report_detail::collect_functionals<N>(c, e, v, w, g, selected,
	                                          c.functionals ? &rep.warnings : nullptr);

	for (const auto& fv : rep.functionals)
		if (fv.neg_mass_fraction > 0.0)
			rep.warnings.push_back(fv.name + ": outer measure carries signed mass, negative fraction " +
			                       fmt17(fv.neg_mass_fraction));

	// truncation sensitivity: recompute with the domain widened to 2 x_max and
	// flag values that move by more than 5%
	if (c.weight_v.kind != WeightKind::Table && c.weight_w.kind != WeightKind::Table) {
		RunConfig wide = c;
		wide.grid.x_max *= 2.0;
		const GridPtr<N> g2 = wide.make_grid<N>();
		const Weight<N> v2 = c.weight_v.instantiate<N>("weight_v", g2);
		const Weight<N> w2 = c.weight_w.instantiate<N>("weight_w", g2);
		const auto far = report_detail::collect_functionals<N>(c, e, v2, w2, g2, selected, nullptr);
		for (const auto& fv : rep.functionals)
			if (const FunctionalValue* other = report_detail::find(far, fv.name)) {
				const double base = std::max(std::fabs(fv.value), std::fabs(other->value));
				if (base > 0.0 && std::fabs(fv.value - other->value) / base > 0.05)
					rep.warnings.push_back(fv.name + ": changes " +
					                       report_detail::percent1(std::fabs(fv.value - other->value) / base) +
					                       "% when x_max doubles (truncation-sensitive)");
			}
	} else {
		rep.warnings.push_back("truncation sensitivity not assessed: table weights are bound to their grid");
	}

	// divergence surrogate for the reduction functionals on a finite truncation
	if (e.zone == Zone::QLessP) {
		auto divergence_warning = [&](MultiFunc which, const std::string& label) {
			const auto dc = divergence_check<N>(which, v, w, g, e);
			if (!dc.plausible) {
				std::string msg = label + ": divergence hypothesis not visible on this truncation (outer-half mass fractions";
				for (double fr : dc.tail_fraction) msg += " " + fmt17(fr);
				msg += ")";
				rep.warnings.push_back(msg);
			}
		};
		const std::string n = std::to_string(N);
		if (v_fact && report_detail::find(rep.functionals, "BMR" + n))
			divergence_warning(MultiFunc::BMRn, "BMR" + n + "/BPS" + n);
		if (w_fact && report_detail::find(rep.functionals, "BMR" + n + "*"))
			divergence_warning(MultiFunc::BMRnStar, "BMR" + n + "*/BPS" + n + "*");
	}

	if constexpr (N == 2) {
		rep.chains = zone_chain(ConfigFields::make(v, w, g, e), e);
		rep.checks_pass = rep.chains.all_hold();
		if (with_norm) {
			NormEstimate est = ascend(v, w, e, g, random_starts(c, g), int(c.iters), c.tol);
			rep.estimate = EstimateSummary{est.value, est.probe_lower, est.converged,
			                               static_cast<long long>(est.ascent_trace.size()),
			                               est.best_start};
			const Interval iv =
			    certified_interval(ConfigFields::make(v, w, g, e), e, rep.consts, est.probe_lower);
			rep.certified = std::array<double, 2>{iv.lo, iv.hi};
			if (!(iv.lo <= iv.hi * (1.0 + 1e-10) + 1e-300)) rep.checks_pass = false;
		}
	}
	return rep;
}

inline BoundsReport assemble_report(const RunConfig& c, bool with_norm) {
	if (with_norm && c.dims != 2) cfg::fail("dims", "norm estimation requires dims = 2");
	switch (c.dims) {
		case 1: return assemble_report_impl<1>(c, false);
		case 2: return assemble_report_impl<2>(c, with_norm);
		case 3: return assemble_report_impl<3>(c, false);
		case 4: return assemble_report_impl<4>(c, false);
	}
	cfg::fail("dims", "must lie in 1..4");
}

inline std::string report_json(const BoundsReport& rep, const char* command, const RunConfig& c) {
	JsonWriter w;
	w.begin_object();
	w.field("command", command);
	w.begin_object("exponents");
	w.field("p", rep.exps.p);
	w.field("q", rep.exps.q);
	w.field("p_conj", rep.exps.p_conj);
	w.field("q_conj", rep.exps.q_conj);
	if (rep.exps.has_r) w.field("r", rep.exps.r);
	w.field("zone", zone_name(rep.exps.zone));
	if (rep.consts.b_zone) w.field("b_zone", rep.consts.b_zone);
	w.end_object();
	w.begin_object("grid");
	w.field("dims", rep.dims);
	w.field("x_min", c.grid.x_min);
	w.field("x_max", c.grid.x_max);
	w.field("nodes_per_axis", c.grid.nodes_per_axis);
	w.field("spacing", c.grid.spacing);
	w.end_object();
	w.begin_object("constants");
	w.field("c_lower", rep.consts.c_lower);
	if (rep.consts.C_upper) w.field("C_upper", *rep.consts.C_upper);
	if (rep.consts.alpha) w.field("alpha", *rep.consts.alpha);
	if (rep.consts.alpha_conj) w.field("alpha_conj", *rep.consts.alpha_conj);
	if (rep.consts.beta) w.field("beta", *rep.consts.beta);
	if (rep.consts.beta_conj) w.field("beta_conj", *rep.consts.beta_conj);
	if (rep.consts.bold_beta_pq) w.field("bold_beta_pq", *rep.consts.bold_beta_pq);
	if (rep.consts.bold_beta_qconj_pconj)
		w.field("bold_beta_qconj_pconj", *rep.consts.bold_beta_qconj_pconj);
	w.field("C_sum", rep.consts.C_sum);
	w.field("sum_route", rep.consts.sum_route);
	w.end_object();
	w.begin_array("functionals");
	for (const auto& fv : rep.functionals) {
		w.begin_object();
		w.field("name", fv.name);
		w.field("value", fv.value);
		if (fv.has_witness) {
			w.begin_array("witness");
			for (double x : fv.witness) w.item(x);
			w.end_array();
			w.begin_array("witness_node");
			for (int i : fv.witness_node) w.item(i);
			w.end_array();
		}
		w.field("neg_mass_fraction", fv.neg_mass_fraction);
		w.end_object();
	}
	w.end_array();
	w.begin_array("chains");
	for (const auto& ce : rep.chains.entries) {
		w.begin_object();
		w.field("label", ce.label);
		w.field("lhs", ce.lhs);
		w.field("bound", ce.bound);
		w.field("margin", ce.margin());
		w.field("holds", ce.holds());
		w.end_object();
	}
	w.end_array();
	if (rep.estimate) {
		w.begin_object("estimate");
		w.field("value", rep.estimate->value);
		w.field("probe_lower", rep.estimate->probe_lower);
		w.field("converged", rep.estimate->converged);
		w.field("iterations", rep.estimate->iterations);
		w.field("best_start", rep.estimate->best_start);
		w.end_object();
	}
	if (rep.certified) {
		w.begin_object("certified");
		w.field("lo", (*rep.certified)[0]);
		w.field("hi", (*rep.certified)[1]);
		w.end_object();
	}
	w.begin_array("warnings");
	for (const auto& s : rep.warnings) w.item(s);
	w.end_array();
	w.field("checks_pass", rep.checks_pass);
	w.end_object();
	return w.take();
}

// ---------------------------------------------------------------------------
// self-check suites

inline const std::vector<std::string>& verify_suite_names() {
	static const std::vector<std::string> names{"ghs", "lemmas", "limits", "zones", "all"};
	return names;
}

// Runs one named suite (or all of them) with seeds derived deterministically
// from `seed`. A configuration, when supplied, overrides the reference
// instance of the limit and zone checks.
inline std::vector<CheckReport> run_verify_suite(const std::string& suite, std::uint64_t seed,
                                                 const RunConfig* c) {
	bool known = false;
	for (const auto& s : verify_suite_names())
		if (s == suite) known = true;
	if (!known) cfg::fail("suite", "must be one of ghs, lemmas, limits, zones, all");

	std::vector<CheckReport> out;
	std::uint64_t counter = 0;
	if (suite == "ghs" || suite == "all") {
		for (double gamma : {0.5, 1.0, 2.0, 3.0})
			for (double ratio : {1.5, 2.0, 4.0, 0.25, 0.5, 0.75}) {
				CheckReport rep = check_ghs(gamma, ratio, 1000, derive_seed(seed, counter++));
				rep.note = "gamma=" + fmt17(gamma) + " ratio=" + fmt17(ratio);
				out.push_back(std::move(rep));
			}
	}
	if (suite == "lemmas" || suite == "all") {
		const GridPtr<2> g = Grid<2>::log_uniform(1e-2, 1e2, 48);
		int cfg_index = 0;
		for (auto [p, q] : {std::pair{2.0, 3.0}, std::pair{3.0, 2.0}})
			for (BoxCase which : {BoxCase::Forward, BoxCase::Adjoint}) {
				const Exponents e = Exponents::make(p, q);
				Rng rng(derive_seed(seed, 100 + std::uint64_t(cfg_index)));
				const RandomWeightPair pair = draw_power_pair(rng, e);
				CheckReport rep = check_lemma_boxes(which, pair.v, pair.w, e, g, 100,
				                                    derive_seed(seed, 200 + std::uint64_t(cfg_index)));
				rep.note = "p=" + fmt17(p) + " q=" + fmt17(q) + " " + rep.note;
				out.push_back(std::move(rep));
				++cfg_index;
			}
	}
	if (suite == "limits" || suite == "all") {
		const bool use_cfg = c && c->dims == 2;
		if (use_cfg && c->deltas.size() == 1)
			cfg::fail("deltas", "limit checks need at least two decreasing deltas");
		const std::vector<double> deltas =
		    use_cfg && !c->deltas.empty() ? c->deltas : std::vector<double>{0.4, 0.2, 0.1};
		if (use_cfg) {
			const GridPtr<2> g = c->make_grid<2>();
			out.push_back(check_limit_AB(c->weight_v.instantiate<2>("weight_v", g),
			                             c->weight_w.instantiate<2>("weight_w", g), g, c->p, deltas));
		} else {
			const GridPtr<2> g = Grid<2>::linear_uniform(1e-9, 1.0, 64);
			const Weight<2> ones = Weight<2>::power(1.0, {0.0, 0.0});
			out.push_back(check_limit_AB(ones, ones, g, 3.0, deltas));
		}
	}
	if (suite == "zones" || suite == "all") {
		const Exponents e = (c && c->q < c->p) ? Exponents::make(c->p, c->q) : Exponents::make(3.0, 2.0);
		out.push_back(check_zones(e));
	}
	return out;
}

inline std::string verify_json(const std::string& suite, std::uint64_t seed,
                               const std::vector<CheckReport>& reps) {
	JsonWriter w;
	w.begin_object();
	w.field("command", "verify");
	w.field("suite", suite);
	w.field("seed", static_cast<long long>(seed));
	bool all = true;
	w.begin_array("checks");
	for (const auto& r : reps) {
		w.begin_object();
		w.field("name", r.check_name);
		w.field("instances", r.instances_run);
		w.field("worst_margin", r.worst_margin);
		w.field("passed", r.passed());
		if (!r.note.empty()) w.field("note", r.note);
		if (!r.failing_instance.empty()) w.field("failing_instance", r.failing_instance);
		w.end_object();
		all = all && r.passed();
	}
	w.end_array();
	w.field("all_passed", all);
	w.end_object();
	return w.take();
}

inline bool all_passed(const std::vector<CheckReport>& reps) {
	for (const auto& r : reps)
		if (!r.passed()) return false;
	return true;
}

// ---------------------------------------------------------------------------
// sweeps

inline int thread_cap() {
	if (const char* s = std::getenv("HARDYCERT_THREADS")) {
		const int v = std::atoi(s);
		if (v >= 1) return v;
	}
	const unsigned h = std::thread::hardware_concurrency();
	return h ? int(h) : 1;
}

// "start:stop:step" -> the arithmetic progression it spans; every value must
// be a valid norm exponent.
inline std::vector<double> parse_range(const std::string& field, const std::string& text) {
	if (text.empty()) cfg::fail(field, "required (start:stop:step)");
	double start = 0.0, stop = 0.0, step = 0.0;
	char tail = 0;
	if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &tail) != 3)
		cfg::fail(field, "must have the form start:stop:step");
	if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step) || !(step > 0.0))
		cfg::fail(field, "needs finite endpoints and a positive step");
	std::vector<double> out;
	for (int k = 0;; ++k) {
		const double x = start + double(k) * step;
		if (x > stop + step * 1e-9) break;
		out.push_back(x);
	}
	if (out.empty()) cfg::fail(field, "range is empty");
	for (double x : out)
		if (!(x > 1.0)) cfg::fail(field, "every value must exceed 1");
	return out;
}

inline const char* kSweepHeader =
    "p,q,r,zone,A1,A2,A3,B1,B2,B3,Bv,Bw,c_lower,C_upper,probe_lower,ascent,certified_lo,certified_hi";

// One CSV data row; columns without a defined value in the row's zone stay
// empty (r and C_upper on the diagonal, the B family outside q < p).
inline std::string sweep_row(double p, double q, const Weight<2>& v, const Weight<2>& w,
                             const GridPtr<2>& g, const RunConfig& c) {
	const Exponents e = Exponents::make(p, q);
	const ConstantSet cs = constants(e);
	const ConfigFields f = ConfigFields::make(v, w, g, e);

	std::string row = fmt17(p) + "," + fmt17(q) + ",";
	if (e.has_r) row += fmt17(e.r);
	row += std::string(",") + zone_name(e.zone);
	for (AFunc af : {AFunc::A1, AFunc::A2, AFunc::A3})
		row += "," + fmt17(a_functional(af, f, e).value);
	if (e.zone == Zone::QLessP) {
		for (BFunc bf : {BFunc::B1, BFunc::B2, BFunc::B3})
			row += "," + fmt17(b_functional(bf, f, e).value);
		row += "," + fmt17(bv_functional(BvFunc::Bv, f, e).value);
		row += "," + fmt17(bv_functional(BvFunc::Bw, f, e).value);
	} else {
		row += ",,,,,";
	}
	row += "," + fmt17(cs.c_lower);
	row += ",";
	if (cs.C_upper) row += fmt17(*cs.C_upper);

	NormEstimate est = ascend(v, w, e, g, random_starts(c, g), int(c.iters), c.tol);
	const Interval iv = certified_interval(f, e, cs, est.probe_lower);
	row += "," + fmt17(est.probe_lower) + "," + fmt17(est.value) + "," + fmt17(iv.lo) + "," +
	       fmt17(iv.hi);
	return row;
}

// Full sweep over the configured p and q ranges. Rows are computed in
// parallel up to the HARDYCERT_THREADS cap but always emitted in ascending
// (p, q) order.
inline std::string sweep_csv(const RunConfig& c) {
	if (c.dims != 2) cfg::fail("dims", "sweep requires dims = 2");
	const std::vector<double> ps = parse_range("p_range", c.p_range);
	const std::vector<double> qs = parse_range("q_range", c.q_range);

	const GridPtr<2> g = c.make_grid<2>();
	const Weight<2> v = c.weight_v.instantiate<2>("weight_v", g);
	const Weight<2> w = c.weight_w.instantiate<2>("weight_w", g);

	const std::size_t rows = ps.size() * qs.size();
	std::vector<std::string> lines(rows);
	std::atomic<std::size_t> next{0};
	std::exception_ptr first_error;
	std::mutex error_mu;
	auto worker = [&] {
		for (;;) {
			const std::size_t k = next.fetch_add(1);
			if (k >= rows) return;
			try {
				lines[k] = sweep_row(ps[k / qs.size()], qs[k % qs.size()], v, w, g, c);
			} catch (...) {
				std::lock_guard<std::mutex> lock(error_mu);
				if (!first_error) first_error = std::current_exception();
				return;
			}
		}
	};
	const int threads = std::min<int>(thread_cap(), int(rows));
	if (threads <= 1) {
		worker();
	} else {
		std::vector<std::thread> pool;
		for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
		for (auto& t : pool) t.join();
	}
	if (first_error) std::rethrow_exception(first_error);

	std::string out = std::string(kSweepHeader) + "\n";
	for (const auto& line : lines) out += line + "\n";
	return out;
}

}  // namespace hardycert
