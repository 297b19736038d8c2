#include "prhc/harness/report_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace prhc::harness {

using json = nlohmann::ordered_json;

ReportFormat parse_format(std::string_view name)
{
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown format '" + std::string(name) + "' (expected csv|json)");
}

std::string format_number(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view s)
{
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

namespace {

const char* flag(bool b) { return b ? "true" : "false"; }

json number(double v)
{
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double number_from(const json& j)
{
  if (j.is_string()) return parse_number(j.get<std::string>());
  return j.get<double>();
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

std::string rows_to_csv(const std::vector<ReportRow>& rows)
{
  std::ostringstream os;
  os << kRowHeader << '\n';
  for (const auto& r : rows) {
    os << r.seed << ',' << r.cost_kind << ',' << r.policy << ',' << r.n << ',' << r.m << ',' << r.T << ',' << r.N
       << ',' << r.M << ',' << format_number(r.J) << ',' << format_number(r.energy) << ',' << format_number(r.gain)
       << ',' << format_number(r.beta) << ',' << format_number(r.gamma_bar_sq) << ',' << flag(r.certified) << ','
       << format_number(r.omega_op) << ',' << format_number(r.bound) << ',' << flag(r.satisfied) << ','
       << flag(r.truncated_tail) << '\n';
  }
  return os.str();
}

std::string aggregates_to_csv(const std::vector<AggregateCell>& cells)
{
  std::ostringstream os;
  os << kAggregateHeader << '\n';
  for (const auto& c : cells) {
    os << c.cost_kind << ',' << c.policy << ',' << c.N << ',' << c.iterations << ',' << format_number(c.mean_J) << ','
       << format_number(c.mean_energy) << ',' << format_number(c.dg) << ',' << format_number(c.mean_gain) << ','
       << format_number(c.two_beta_gamma_bar_sq) << ',' << format_number(c.two_over_beta_gamma_bar_sq) << ','
       << c.bound_checks << ',' << c.bound_violations << '\n';
  }
  return os.str();
}

std::string report_to_json(const ExperimentReport& report)
{
  json config = json::object();
  for (const auto& [k, v] : report.config) config[k] = v;

  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"seed", r.seed},
                    {"cost_kind", r.cost_kind},
                    {"policy", r.policy},
                    {"n", r.n},
                    {"m", r.m},
                    {"T", r.T},
                    {"N", r.N},
                    {"M", r.M},
                    {"J", number(r.J)},
                    {"energy", number(r.energy)},
                    {"gain", number(r.gain)},
                    {"beta", number(r.beta)},
                    {"gamma_bar_sq", number(r.gamma_bar_sq)},
                    {"certified", r.certified},
                    {"omega_op", number(r.omega_op)},
                    {"bound", number(r.bound)},
                    {"satisfied", r.satisfied},
                    {"truncated_tail", r.truncated_tail}});
  }

  json cells = json::array();
  for (const auto& c : report.aggregates) {
    cells.push_back({{"cost_kind", c.cost_kind},
                     {"policy", c.policy},
                     {"N", c.N},
                     {"iterations", c.iterations},
                     {"mean_J", number(c.mean_J)},
                     {"mean_energy", number(c.mean_energy)},
                     {"dg", number(c.dg)},
                     {"mean_gain", number(c.mean_gain)},
                     {"two_beta_gamma_bar_sq", number(c.two_beta_gamma_bar_sq)},
                     {"two_over_beta_gamma_bar_sq", number(c.two_over_beta_gamma_bar_sq)},
                     {"bound_checks", c.bound_checks},
                     {"bound_violations", c.bound_violations}});
  }
  json doc = {{"config", config}, {"rows", rows}, {"aggregates", cells}};
  return doc.dump(2) + "\n";
}

ExperimentReport report_from_json(std::string_view text)
{
  ExperimentReport report;
  try {
    const json doc = json::parse(text);
    for (const auto& [k, v] : doc.at("config").items()) report.config.emplace_back(k, v.get<std::string>());
    for (const auto& j : doc.at("rows")) {
      ReportRow r;
      r.seed = j.at("seed").get<std::uint64_t>();
      r.cost_kind = j.at("cost_kind").get<std::string>();
      r.policy = j.at("policy").get<std::string>();
      r.n = j.at("n").get<Index>();
      r.m = j.at("m").get<Index>();
      r.T = j.at("T").get<Index>();
      r.N = j.at("N").get<Index>();
      r.M = j.at("M").get<Index>();
      r.J = number_from(j.at("J"));
      r.energy = number_from(j.at("energy"));
      r.gain = number_from(j.at("gain"));
      r.beta = number_from(j.at("beta"));
      r.gamma_bar_sq = number_from(j.at("gamma_bar_sq"));
      r.certified = j.at("certified").get<bool>();
      r.omega_op = number_from(j.at("omega_op"));
      r.bound = number_from(j.at("bound"));
      r.satisfied = j.at("satisfied").get<bool>();
      r.truncated_tail = j.at("truncated_tail").get<bool>();
      report.rows.push_back(std::move(r));
    }
    if (doc.contains("aggregates")) {
      for (const auto& j : doc.at("aggregates")) {
        AggregateCell c;
        c.cost_kind = j.at("cost_kind").get<std::string>();
        c.policy = j.at("policy").get<std::string>();
        c.N = j.at("N").get<Index>();
        c.iterations = j.at("iterations").get<Index>();
        c.mean_J = number_from(j.at("mean_J"));
        c.mean_energy = number_from(j.at("mean_energy"));
        c.dg = number_from(j.at("dg"));
        c.mean_gain = number_from(j.at("mean_gain"));
        c.two_beta_gamma_bar_sq = number_from(j.at("two_beta_gamma_bar_sq"));
        c.two_over_beta_gamma_bar_sq = number_from(j.at("two_over_beta_gamma_bar_sq"));
        c.bound_checks = j.at("bound_checks").get<Index>();
        c.bound_violations = j.at("bound_violations").get<Index>();
        report.aggregates.push_back(std::move(c));
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
  return report;
}

void write_text(const std::string& text, const std::string& path)
{
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string read_text(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path)
{
  write_text(format == ReportFormat::csv ? rows_to_csv(report.rows) : report_to_json(report), path);
}

bool identical(const ReportRow& a, const ReportRow& b)
{
  return a.seed == b.seed && a.cost_kind == b.cost_kind && a.policy == b.policy && a.n == b.n && a.m == b.m &&
         a.T == b.T && a.N == b.N && a.M == b.M && same(a.J, b.J) && same(a.energy, b.energy) &&
         same(a.gain, b.gain) && same(a.beta, b.beta) && same(a.gamma_bar_sq, b.gamma_bar_sq) &&
         a.certified == b.certified && same(a.omega_op, b.omega_op) && same(a.bound, b.bound) &&
         a.satisfied == b.satisfied && a.truncated_tail == b.truncated_tail;
}

bool identical(const ExperimentReport& a, const ExperimentReport& b)
{
  if (a.config != b.config || a.rows.size() != b.rows.size() || a.aggregates.size() != b.aggregates.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    if (!identical(a.rows[i], b.rows[i])) return false;
  for (std::size_t i = 0; i < a.aggregates.size(); ++i) {
    const auto &x = a.aggregates[i], &y = b.aggregates[i];
    const bool eq = x.cost_kind == y.cost_kind && x.policy == y.policy && x.N == y.N && x.iterations == y.iterations &&
                    same(x.mean_J, y.mean_J) && same(x.mean_energy, y.mean_energy) && same(x.dg, y.dg) &&
                    same(x.mean_gain, y.mean_gain) && same(x.two_beta_gamma_bar_sq, y.two_beta_gamma_bar_sq) &&
                    same(x.two_over_beta_gamma_bar_sq, y.two_over_beta_gamma_bar_sq) &&
                    x.bound_checks == y.bound_checks && x.bound_violations == y.bound_violations;
    if (!eq) return false;
  }
  return true;
}

ConfigEcho parse_config_text(std::string_view text)
{
  const auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  ConfigEcho out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& kv) { return kv.first == key; });
    if (it != out.end()) {
      it->second = std::move(value);
    } else {
      out.emplace_back(std::move(key), std::move(value));
    }
  }
  return out;
}

}  // namespace prhc::harness
