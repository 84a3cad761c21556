#pragma once

// JSON emission with 17 significant digits for every floating-point number.

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "ujack/sim.hpp"
#include "ujack/stattests.hpp"

namespace ujack {

using Json = nlohmann::ordered_json;

namespace detail {

inline void dump17(const Json& j, std::string& out, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump17(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump17(v, out, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double d = j.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

inline Json point_json(const std::vector<double>& x) {
  if (x.size() == 1) return x[0];
  return Json(x);
}

}  // namespace detail

inline std::string dump_json(const Json& j, int indent = 2) {
  std::string out;
  detail::dump17(j, out, indent, 0);
  out += '\n';
  return out;
}

inline Json to_json(const TestReport& rep) {
  Json j;
  j["method"] = rep.method;
  j["n"] = rep.n;
  j["m"] = rep.m;
  j["r"] = rep.r;
  Json grid = Json::array();
  for (const auto& x : rep.grid) grid.push_back(detail::point_json(x));
  j["grid"] = grid;
  j["bandwidths"] = rep.bandwidths;
  j["statistic"] = rep.statistic;
  j["critical_value"] = rep.critical_value;
  j["p_value"] = rep.p_value;
  j["reject"] = rep.reject;
  j["alpha"] = rep.alpha;
  j["boot"] = rep.boot;
  j["seed"] = rep.seed;
  j["dropped_thetas"] = rep.dropped_thetas;
  Json rows = Json::array();
  for (const auto& row : rep.per_theta) {
    Json t;
    t["x"] = detail::point_json(row.theta.x);
    t["b"] = row.theta.b;
    t["u"] = row.u;
    t["c_hat"] = row.c_hat;
    if (row.theta.y) t["y"] = *row.theta.y;
    if (rep.two_sided) t["negated"] = row.theta.negated;
    rows.push_back(t);
  }
  j["per_theta"] = rows;
  return j;
}

inline Json to_json(const SimResult& res) {
  const auto& c = res.config;
  Json cfg;
  cfg["n"] = c.n;
  cfg["error"] = error_kind_name(c.error);
  cfg["error_scale"] = error_kind_scale(c.error);
  cfg["reps"] = c.reps;
  cfg["boot"] = c.boot;
  cfg["alpha_list"] = c.alphas;
  cfg["grid_min"] = c.grid_min;
  cfg["grid_max"] = c.grid_max;
  cfg["grid_points"] = c.grid_points;
  cfg["bandwidth_exponent"] = c.bandwidth_exponent;
  cfg["bandwidth"] = c.bandwidth();
  cfg["seed"] = c.seed;

  Json j;
  j["config"] = cfg;
  j["completed"] = res.completed();
  j["failed"] = res.failed;
  Json rates = Json::array();
  for (std::size_t a = 0; a < c.alphas.size(); ++a) {
    Json r;
    r["alpha"] = c.alphas[a];
    r["rate"] = res.rates[a];
    rates.push_back(r);
  }
  j["rates"] = rates;
  Json p = Json::array();
  for (double v : res.p_values) p.push_back(std::isnan(v) ? Json(nullptr) : Json(v));
  j["p_values"] = p;
  return j;
}

}  // namespace ujack
