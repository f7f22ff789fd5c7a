// Copyright 2026 The scilib-offload Authors.
// SPDX-License-Identifier: Apache-2.0

#include "scilib/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace scilib {

using nlohmann::ordered_json;

TraceParseError::TraceParseError(std::size_t line, const std::string& what)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%" PRIx64, v);
  return buf;
}

std::string one_char(char c) { return std::string(1, c); }

struct Reader {
  const ordered_json& obj;
  std::size_t line;

  const ordered_json& field(const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) throw TraceParseError(line, std::string("missing field '") + key + "'");
    return *it;
  }
  std::int64_t integer(const char* key) const {
    const auto& v = field(key);
    if (!v.is_number_integer()) throw TraceParseError(line, std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer(const char* key) const {
    const auto& v = field(key);
    if (!v.is_number_unsigned()) {
      throw TraceParseError(line, std::string("field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  double number(const char* key) const {
    const auto& v = field(key);
    if (!v.is_number()) throw TraceParseError(line, std::string("field '") + key + "' must be a number");
    return v.get<double>();
  }
  std::string text(const char* key) const {
    const auto& v = field(key);
    if (!v.is_string()) throw TraceParseError(line, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }
  char flag(const char* key) const {
    const std::string s = text(key);
    if (s.size() != 1) throw TraceParseError(line, std::string("field '") + key + "' must be one character");
    return s[0];
  }
};

OperandSpan parse_operand(const ordered_json& obj, std::size_t line) {
  if (!obj.is_object()) throw TraceParseError(line, "operand must be an object");
  Reader r{obj, line};
  OperandSpan span;
  const std::string base = r.text("base");
  if (base.size() < 3 || base[0] != '0' || (base[1] != 'x' && base[1] != 'X')) {
    throw TraceParseError(line, "operand base must be a hex string like 0x1000");
  }
  std::size_t used = 0;
  try {
    span.base = std::stoull(base.substr(2), &used, 16);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != base.size() - 2) throw TraceParseError(line, "operand base '" + base + "' is not hexadecimal");
  span.rows = r.integer("rows");
  span.cols = r.integer("cols");
  span.ld = r.integer("ld");
  const std::int64_t eb = r.integer("elem_bytes");
  if (eb <= 0 || eb > 64) throw TraceParseError(line, "operand elem_bytes out of range");
  span.elem_bytes = static_cast<std::uint32_t>(eb);
  const auto role = parse_role(r.text("role"));
  if (!role) throw TraceParseError(line, "operand role must be in, out or inout");
  span.role = *role;
  return span;
}

}  // namespace

std::string to_json_line(const TraceEvent& e) {
  ordered_json j;
  const BlasCall& c = e.call;
  j["seq"] = e.seq;
  j["routine"] = c.routine.name();
  j["precision"] = one_char(to_char(c.routine.precision));
  j["transA"] = one_char(to_char(c.trans_a));
  j["transB"] = one_char(to_char(c.trans_b));
  j["side"] = one_char(to_char(c.side));
  j["uplo"] = one_char(to_char(c.uplo));
  j["m"] = c.m;
  j["n"] = c.n;
  j["k"] = c.k;
  j["alpha_re"] = c.alpha.real();
  j["alpha_im"] = c.alpha.imag();
  j["beta_re"] = c.beta.real();
  j["beta_im"] = c.beta.imag();
  ordered_json ops = ordered_json::array();
  for (const auto& op : c.operands) {
    ordered_json o;
    o["base"] = hex(op.base);
    o["rows"] = op.rows;
    o["cols"] = op.cols;
    o["ld"] = op.ld;
    o["elem_bytes"] = op.elem_bytes;
    o["role"] = std::string(role_name(op.role));
    ops.push_back(std::move(o));
  }
  j["operands"] = std::move(ops);
  j["thread"] = c.thread;
  if (e.decision) {
    j["decision"] = *e.decision == Decision::kOffload ? "offload" : "cpu";
  } else {
    j["decision"] = nullptr;
  }
  j["bytes_moved"] = e.bytes_moved;
  if (e.wall_ns) {
    j["wall_ns"] = *e.wall_ns;
  } else {
    j["wall_ns"] = nullptr;
  }
  j["host_ns"] = e.host_ns;
  return j.dump();
}

TraceEvent parse_trace_line(std::string_view line, std::size_t line_no) {
  ordered_json j;
  try {
    j = ordered_json::parse(line.begin(), line.end());
  } catch (const ordered_json::parse_error&) {
    throw TraceParseError(line_no, "not a JSON object");
  }
  if (!j.is_object()) throw TraceParseError(line_no, "not a JSON object");
  Reader r{j, line_no};
  TraceEvent e;
  e.seq = r.unsigned_integer("seq");
  const std::string routine = r.text("routine");
  const auto parsed = parse_routine(routine);
  if (!parsed) throw TraceParseError(line_no, "unknown routine '" + routine + "'");
  if (r.flag("precision") != to_char(parsed->precision)) {
    throw TraceParseError(line_no, "precision does not match routine '" + routine + "'");
  }
  BlasCall& c = e.call;
  c.routine = *parsed;
  const auto ta = parse_trans(r.flag("transA"));
  const auto tb = parse_trans(r.flag("transB"));
  const auto side = parse_side(r.flag("side"));
  const auto uplo = parse_uplo(r.flag("uplo"));
  if (!ta || !tb) throw TraceParseError(line_no, "transA/transB must be N, T or C");
  if (!side) throw TraceParseError(line_no, "side must be L or R");
  if (!uplo) throw TraceParseError(line_no, "uplo must be U or L");
  c.trans_a = *ta;
  c.trans_b = *tb;
  c.side = *side;
  c.uplo = *uplo;
  c.m = r.integer("m");
  c.n = r.integer("n");
  c.k = r.integer("k");
  c.alpha = {r.number("alpha_re"), r.number("alpha_im")};
  c.beta = {r.number("beta_re"), r.number("beta_im")};
  const auto& ops = r.field("operands");
  if (!ops.is_array()) throw TraceParseError(line_no, "operands must be an array");
  for (const auto& op : ops) c.operands.push_back(parse_operand(op, line_no));
  c.thread = r.unsigned_integer("thread");
  const auto& decision = r.field("decision");
  if (decision.is_string() && decision.get<std::string>() == "offload") {
    e.decision = Decision::kOffload;
  } else if (decision.is_string() && decision.get<std::string>() == "cpu") {
    e.decision = Decision::kCpu;
  } else if (!decision.is_null()) {
    throw TraceParseError(line_no, "decision must be \"cpu\", \"offload\" or null");
  }
  e.bytes_moved = r.unsigned_integer("bytes_moved");
  if (!r.field("wall_ns").is_null()) e.wall_ns = r.unsigned_integer("wall_ns");
  e.host_ns = r.unsigned_integer("host_ns");
  return e;
}

std::vector<TraceEvent> read_trace(std::istream& in) {
  std::vector<TraceEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    events.push_back(parse_trace_line(line, line_no));
  }
  return events;
}

std::vector<TraceEvent> read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  return read_trace(in);
}

void write_trace(std::ostream& out, const std::vector<TraceEvent>& events) {
  for (const auto& e : events) out << to_json_line(e) << '\n';
}

}  // namespace scilib
