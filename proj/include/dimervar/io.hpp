#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "lattice.hpp"
#include "variational.hpp"

namespace dimervar::io {

using json = nlohmann::json;

namespace detail {

template <class Err>
const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Err(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class Err>
std::vector<int> int_tuple(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) throw Err(std::string(what) + ": expected " + std::to_string(n) + " integers");
  std::vector<int> out;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw Err(std::string(what) + ": expected integers");
    out.push_back(x.get<int>());
  }
  return out;
}

template <class Err>
std::vector<double> num_tuple(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) throw Err(std::string(what) + ": expected " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw Err(std::string(what) + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace detail

inline json to_json(const Region& r) {
  json cells = json::array();
  for (Cell c : r.cells()) cells.push_back({c.x, c.y});
  return {{"cells", cells}, {"base_vertex", {r.base_vertex().x, r.base_vertex().y}}, {"base_height", r.base_height()}};
}

inline Region region_from_json(const json& j) {
  std::vector<Cell> cells;
  const auto& jc = detail::field<InvalidRegion>(j, "cells");
  if (!jc.is_array()) throw InvalidRegion("'cells' must be an array");
  for (const auto& c : jc) {
    auto v = detail::int_tuple<InvalidRegion>(c, 2, "cell");
    cells.push_back({v[0], v[1]});
  }
  auto b = detail::int_tuple<InvalidRegion>(detail::field<InvalidRegion>(j, "base_vertex"), 2, "base_vertex");
  int h0 = 0;
  if (j.contains("base_height")) {
    if (!j["base_height"].is_number_integer()) throw InvalidRegion("'base_height' must be an integer");
    h0 = j["base_height"].get<int>();
  }
  return Region(std::move(cells), {b[0], b[1]}, h0);
}

inline json to_json(const Region& r, const HeightFunction& h) {
  if (h.values.size() != r.vertices().size()) throw InvalidHeight("height function does not match region");
  json vs = json::array();
  for (std::size_t i = 0; i < h.values.size(); ++i) vs.push_back({r.vertices()[i].x, r.vertices()[i].y, h[i]});
  return {{"vertices", vs}};
}

/// Reads {"vertices": [[x,y,h],...]}; every vertex of the region must appear once.
inline HeightFunction height_from_json(const Region& r, const json& j) {
  const auto& jv = detail::field<InvalidHeight>(j, "vertices");
  if (!jv.is_array()) throw InvalidHeight("'vertices' must be an array");
  HeightFunction h;
  h.values.assign(r.vertices().size(), 0);
  std::vector<char> seen(h.values.size(), 0);
  for (const auto& e : jv) {
    auto v = detail::int_tuple<InvalidHeight>(e, 3, "vertex");
    const int i = r.vertex_index({v[0], v[1]});
    if (i < 0) throw InvalidHeight("vertex (" + std::to_string(v[0]) + "," + std::to_string(v[1]) + ") not in region");
    if (seen[i]) throw InvalidHeight("duplicate vertex");
    seen[i] = 1;
    h.values[i] = v[2];
  }
  for (char s : seen)
    if (!s) throw InvalidHeight("height function is missing vertices");
  return h;
}

inline json to_json(const Tiling& t) {
  json ds = json::array();
  for (const auto& d : t.dominos)
    ds.push_back({d.cell1.x, d.cell1.y, d.cell2.x, d.cell2.y});
  return {{"dominos", ds}};
}

inline Tiling tiling_from_json(const json& j) {
  const auto& jd = detail::field<InvalidTiling>(j, "dominos");
  if (!jd.is_array()) throw InvalidTiling("'dominos' must be an array");
  std::vector<Domino> ds;
  for (const auto& e : jd) {
    auto v = detail::int_tuple<InvalidTiling>(e, 4, "domino");
    ds.push_back(make_domino({v[0], v[1]}, {v[2], v[3]}));
  }
  return make_tiling(std::move(ds));
}

/// Continuous region {"polygon": [[x,y],...]}, counterclockwise.
inline ContinuousRegion polygon_from_json(const json& j) {
  ContinuousRegion R;
  const auto& jp = detail::field<InvalidRegion>(j, "polygon");
  if (!jp.is_array()) throw InvalidRegion("'polygon' must be an array");
  for (const auto& p : jp) {
    auto v = detail::num_tuple<InvalidRegion>(p, 2, "polygon point");
    R.boundary.push_back({v[0], v[1]});
  }
  return R;
}

inline json to_json(const ContinuousRegion& R) {
  json ps = json::array();
  for (auto p : R.boundary) ps.push_back({p.x, p.y});
  return {{"polygon", ps}};
}

/// Boundary heights {"samples": [[x,y,h],...]}.
inline BoundaryData boundary_from_json(const json& j) {
  BoundaryData d;
  const auto& js = detail::field<InfeasibleBoundary>(j, "samples");
  if (!js.is_array()) throw InfeasibleBoundary("'samples' must be an array");
  for (const auto& s : js) {
    auto v = detail::num_tuple<InfeasibleBoundary>(s, 3, "boundary sample");
    d.samples.push_back({{v[0], v[1]}, v[2]});
  }
  return d;
}

inline json to_json(const BoundaryData& d) {
  json ss = json::array();
  for (const auto& s : d.samples) ss.push_back({s.p.x, s.p.y, s.h});
  return {{"samples", ss}};
}

inline json to_json(const DiscreteField& F, const SolveReport& rep) {
  json ns = json::array();
  for (std::size_t k = 0; k < F.nodes.size(); ++k) ns.push_back({F.nodes[k].x, F.nodes[k].y, F.values[k]});
  return {{"delta", F.delta}, {"nodes", ns}, {"ent", rep.ent}, {"residual_norm", rep.residual_norm}};
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidRegion("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidRegion(path + ": " + e.what());
  }
}

/// Doubles are printed with 12 significant digits, everything else as by dump().
inline void write_compact(std::ostream& os, const json& j) {
  switch (j.type()) {
    case json::value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%#.12g", j.get<double>());
      std::string s = buf;
      if (s.find_first_of("eE") != std::string::npos) {
        // %#g keeps the point; strip it before an exponent with no fraction.
        auto e = s.find_first_of("eE");
        if (e > 0 && s[e - 1] == '.') s.erase(e - 1, 1);
      } else if (!s.empty() && s.back() == '.') {
        s.push_back('0');
      }
      if (s == "nan" || s == "-nan" || s == "inf" || s == "-inf") s = "null";
      os << s;
      break;
    }
    case json::value_t::array: {
      os << '[';
      bool first = true;
      for (const auto& x : j) {
        if (!first) os << ',';
        first = false;
        write_compact(os, x);
      }
      os << ']';
      break;
    }
    case json::value_t::object: {
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ", ";
        first = false;
        os << json(it.key()).dump() << ": ";
        write_compact(os, it.value());
      }
      os << '}';
      break;
    }
    default:
      os << j.dump();
  }
}

inline std::string format(const json& j) {
  std::ostringstream os;
  write_compact(os, j);
  return os.str();
}

}  // namespace dimervar::io
