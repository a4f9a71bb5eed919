#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include <json.hpp>

#include "aoisched/errors.hpp"
#include "aoisched/experiment.hpp"

namespace aoisched::exp {

namespace {

const char* const kColumns[] = {"point", "sweep_variable", "sweep_value", "method", "status", "devices",
                                "delta_max", "round_length", "m_c", "m_r", "eps", "gamma", "aoi",
                                "std_error", "c_cap", "saturated", "detail"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += num(v[i]);
  }
  return out;
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_num(const std::string& s) {
  if (s.empty()) return 0.0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) raise(ErrorCode::ConfigError, "bad number '" + s + "' in CSV");
  return v;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(';', pos);
    out.push_back(parse_num(s.substr(pos, next - pos)));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::vector<std::string>> split_records(std::string_view csv) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const char c = csv[i];
    any = true;
    if (in_quotes) {
      if (c == '"' && i + 1 < csv.size() && csv[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(fields));
      fields.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (any) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  return records;
}

}  // namespace

std::string to_csv(const std::vector<Row>& rows, bool timing) {
  std::string out;
  for (const char* c : kColumns) {
    if (c != kColumns[0]) out += ',';
    out += c;
  }
  if (timing) out += ",wall_ms";
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.point) + ',' + quoted(r.sweep_variable) + ',' + num(r.sweep_value) + ',' + r.method + ',' +
           r.status + ',' + std::to_string(r.devices) + ',' + num(r.delta_max) + ',' + num(r.round_length) + ',' +
           num(r.m_c) + ',' + list(r.m_r) + ',' + list(r.eps) + ',' + list(r.gamma) + ',' + list(r.aoi) + ',' +
           num(r.std_error) + ',' + std::to_string(r.c_cap) + ',' + (r.saturated ? "true" : "false") + ',' +
           quoted(r.detail);
    if (timing) out += ',' + num(r.wall_ms);
    out += '\n';
  }
  return out;
}

std::string to_json(const std::vector<Row>& rows, bool timing) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["point"] = r.point;
    o["sweep_variable"] = r.sweep_variable;
    o["sweep_value"] = r.sweep_value;
    o["method"] = r.method;
    o["status"] = r.status;
    o["devices"] = r.devices;
    o["delta_max"] = r.delta_max;
    o["round_length"] = r.round_length;
    o["m_c"] = r.m_c;
    o["m_r"] = r.m_r;
    o["eps"] = r.eps;
    o["gamma"] = r.gamma;
    o["aoi"] = r.aoi;
    o["std_error"] = r.std_error;
    o["c_cap"] = r.c_cap;
    o["saturated"] = r.saturated;
    o["detail"] = r.detail;
    if (timing) o["wall_ms"] = r.wall_ms;
    arr.push_back(std::move(o));
  }
  nlohmann::ordered_json doc;
  doc["rows"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<Row> rows_from_csv(std::string_view csv) {
  const auto records = split_records(csv);
  if (records.empty()) raise(ErrorCode::ConfigError, "CSV has no header");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records[0].size(); ++i) col[records[0][i]] = i;
  for (const char* c : kColumns) {
    if (!col.count(c)) raise(ErrorCode::ConfigError, std::string("CSV lacks column ") + c);
  }
  std::vector<Row> rows;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& f = records[k];
    if (f.size() != records[0].size()) {
      raise(ErrorCode::ConfigError, "CSV record " + std::to_string(k) + " has the wrong number of fields");
    }
    auto get = [&](const char* name) -> const std::string& { return f[col.at(name)]; };
    Row r;
    r.point = static_cast<std::size_t>(parse_num(get("point")));
    r.sweep_variable = get("sweep_variable");
    r.sweep_value = parse_num(get("sweep_value"));
    r.method = get("method");
    r.status = get("status");
    r.devices = static_cast<std::size_t>(parse_num(get("devices")));
    r.delta_max = parse_num(get("delta_max"));
    r.round_length = parse_num(get("round_length"));
    r.m_c = parse_num(get("m_c"));
    r.m_r = parse_list(get("m_r"));
    r.eps = parse_list(get("eps"));
    r.gamma = parse_list(get("gamma"));
    r.aoi = parse_list(get("aoi"));
    r.std_error = parse_num(get("std_error"));
    r.c_cap = static_cast<int>(parse_num(get("c_cap")));
    r.saturated = get("saturated") == "true";
    r.detail = get("detail");
    if (col.count("wall_ms")) r.wall_ms = parse_num(f[col.at("wall_ms")]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace aoisched::exp
