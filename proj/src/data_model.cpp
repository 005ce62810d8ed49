//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "scalelaw/error.hpp"

namespace scalelaw {

const char *error_kind_name(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::kInvalidArgument:
    return "invalid-argument";
  case ErrorKind::kNotFound:
    return "not-found";
  case ErrorKind::kParse:
    return "parse";
  case ErrorKind::kSchema:
    return "schema";
  case ErrorKind::kDegenerateFit:
    return "degenerate-fit";
  case ErrorKind::kDomain:
    return "domain";
  case ErrorKind::kTooFewPoints:
    return "too-few-points";
  case ErrorKind::kLineSearch:
    return "line-search";
  case ErrorKind::kShapeMismatch:
    return "shape-mismatch";
  case ErrorKind::kIo:
    return "io";
  }
  return "unknown";
}

std::string_view to_string(MetricType type) {
  switch (type) {
  case MetricType::kAcc:
    return "acc";
  case MetricType::kAccNorm:
    return "acc_norm";
  case MetricType::kExactMatch:
    return "exact_match";
  case MetricType::kPassAtK:
    return "pass_at_k";
  }
  return "acc";
}

MetricType parse_metric_type(std::string_view name) {
  if (name == "acc")
    return MetricType::kAcc;
  if (name == "acc_norm")
    return MetricType::kAccNorm;
  if (name == "exact_match")
    return MetricType::kExactMatch;
  if (name == "pass_at_k")
    return MetricType::kPassAtK;
  throw SchemaError("metric_type", "unknown metric type '" + std::string(name) + "'");
}

std::string_view to_string(FilterRule rule) {
  return rule == FilterRule::kMargin ? "margin" : "above_floor";
}

FilterRule parse_filter_rule(std::string_view name) {
  if (name == "margin")
    return FilterRule::kMargin;
  if (name == "above_floor")
    return FilterRule::kAboveFloor;
  throw InvalidArgument("unknown filter rule '" + std::string(name) + "'");
}

const MetricObservation *
ExperimentRecord::primary(std::string_view benchmark) const {
  const MetricObservation *best = nullptr;
  for (const auto &obs: observations) {
    if (obs.benchmark != benchmark)
      continue;
    if (best == nullptr || obs.k.value_or(0) < best->k.value_or(0))
      best = &obs;
  }
  return best;
}

const MetricObservation *ExperimentRecord::find(std::string_view benchmark,
                                                std::optional<int> k) const {
  for (const auto &obs: observations)
    if (obs.benchmark == benchmark && obs.k == k)
      return &obs;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Registry

namespace {
  void check_spec(const BenchmarkSpec &spec) {
    if (!(spec.q_random >= 0 && spec.q_random < 1))
      throw SchemaError("q_random", "must lie in [0, 1) for " + spec.name);
    if (!(spec.filter_margin >= 0))
      throw SchemaError("filter_margin", "must be >= 0 for " + spec.name);
  }
}  // namespace

BenchmarkRegistry BenchmarkRegistry::defaults() {
  BenchmarkRegistry reg;
  const auto mc = MetricType::kAccNorm;
  reg.add({ "ARC-E", mc, 0.291, kDefaultMargin });
  reg.add({ "ARC-C", mc, 0.215, kDefaultMargin });
  reg.add({ "SciQ", mc, 0.304, kDefaultMargin });
  reg.add({ "PIQA", mc, 0.53, kDefaultMargin });
  reg.add({ "HellaSwag", mc, 0.252, kDefaultMargin });
  reg.add({ "Winogrande", MetricType::kAcc, 0.5, kDefaultMargin });
  reg.add({ "WebQS", MetricType::kExactMatch, 0.0, kDefaultMargin });
  reg.add({ "TriviaQA", MetricType::kExactMatch, 0.0, kDefaultMargin });
  reg.add({ "LAMBADA", MetricType::kAcc, 0.0, kDefaultMargin });
  reg.add({ "GSM8K", MetricType::kExactMatch, 0.0, kDefaultMargin });
  reg.add({ "HumanEval", MetricType::kPassAtK, 0.0, kDefaultMargin });
  reg.add({ "LBPP", MetricType::kPassAtK, 0.0, kLbppMargin });
  return reg;
}

BenchmarkRegistry BenchmarkRegistry::from_json(const nlohmann::json &j) {
  if (!j.is_object())
    throw SchemaError("benchmarks", "registry must be a JSON object");
  BenchmarkRegistry reg;
  for (const auto &[name, entry]: j.items()) {
    if (!entry.is_object())
      throw SchemaError(name, "registry entry must be an object");
    BenchmarkSpec spec;
    spec.name = name;
    spec.metric_type =
        parse_metric_type(entry.value("metric_type", std::string("acc")));
    spec.q_random = entry.value("q_random", 0.0);
    spec.filter_margin = entry.value("filter_margin", kDefaultMargin);
    reg.add(std::move(spec));
  }
  return reg;
}

nlohmann::json BenchmarkRegistry::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto &[name, spec]: specs_) {
    j[name] = { { "metric_type", std::string(to_string(spec.metric_type)) },
                { "q_random", spec.q_random },
                { "filter_margin", spec.filter_margin } };
  }
  return j;
}

void BenchmarkRegistry::add(BenchmarkSpec spec) {
  check_spec(spec);
  auto name = spec.name;
  specs_.insert_or_assign(std::move(name), std::move(spec));
}

bool BenchmarkRegistry::contains(std::string_view name) const {
  return specs_.find(name) != specs_.end();
}

const BenchmarkSpec &BenchmarkRegistry::at(std::string_view name) const {
  auto it = specs_.find(name);
  if (it == specs_.end())
    throw NotFound("benchmark not registered: " + std::string(name));
  return it->second;
}

void BenchmarkRegistry::merge(const BenchmarkRegistry &other) {
  for (const auto &[name, spec]: other.specs_)
    add(spec);
}

std::vector<std::string> default_average_benchmarks() {
  return { "ARC-E",    "ARC-C",    "SciQ",    "PIQA",    "HellaSwag",
           "Winogrande", "WebQS", "TriviaQA", "LAMBADA", "HumanEval" };
}

// ---------------------------------------------------------------------------
// Scalar transforms

double compute_flops(double n_params, double d_tokens) {
  if (!(n_params > 0) || !(d_tokens > 0))
    throw InvalidArgument("compute_flops: n_params and d_tokens must be > 0");
  return 6.0 * n_params * d_tokens;
}

double normalize_accuracy(double q, double q_random) {
  if (!(q_random >= 0 && q_random < 1))
    throw InvalidArgument("normalize_accuracy: q_random must lie in [0, 1)");
  return (q - q_random) / (1.0 - q_random);
}

double denormalize_accuracy(double q_norm, double q_random) {
  if (!(q_random >= 0 && q_random < 1))
    throw InvalidArgument("denormalize_accuracy: q_random must lie in [0, 1)");
  return q_random + q_norm * (1.0 - q_random);
}

bool passes_filter(double value, const BenchmarkSpec &spec, FilterRule rule) {
  if (rule == FilterRule::kAboveFloor)
    return value > spec.q_random;
  return value >= spec.q_random + spec.filter_margin;
}

std::vector<ExperimentRecord>
filter_fit_points(const std::vector<ExperimentRecord> &records,
                  const BenchmarkSpec &spec, FilterRule rule) {
  std::vector<ExperimentRecord> out;
  for (const auto &rec: records) {
    const auto *obs = rec.primary(spec.name);
    if (obs != nullptr && passes_filter(obs->value, spec, rule))
      out.push_back(rec);
  }
  return out;
}

bool is_holdout(const ExperimentRecord &record, const HoldoutRule &rule) {
  if (record.flops > rule.flops_threshold)
    return true;
  if (rule.tpr_holdout) {
    const double ref = *rule.tpr_holdout;
    if (std::abs(record.tpr - ref) <= kTprMatchTolerance * std::abs(ref))
      return true;
  }
  return false;
}

HoldoutSplit split_holdout(const std::vector<ExperimentRecord> &records,
                           const HoldoutRule &rule) {
  if (!(rule.flops_threshold > 0))
    throw InvalidArgument("split_holdout: flops_threshold must be > 0");
  HoldoutSplit split;
  for (const auto &rec: records) {
    if (is_holdout(rec, rule)) {
      split.valid.push_back(rec);
      continue;
    }
    if (!rule.k_max) {
      split.train.push_back(rec);
      continue;
    }
    // Large-k observations of a training run are held out on their own.
    ExperimentRecord low = rec, high = rec;
    low.observations.clear();
    high.observations.clear();
    for (const auto &obs: rec.observations)
      (obs.k && *obs.k > *rule.k_max ? high : low).observations.push_back(obs);
    split.train.push_back(std::move(low));
    if (!high.observations.empty())
      split.valid.push_back(std::move(high));
  }
  return split;
}

// ---------------------------------------------------------------------------
// Validation

void validate_record(const ExperimentRecord &rec) {
  if (rec.run_id.empty())
    throw SchemaError("run_id", "must be nonempty");
  if (!(rec.n_params > 0) || !std::isfinite(rec.n_params))
    throw SchemaError("n_params", "must be > 0 (run " + rec.run_id + ")");
  if (!(rec.d_tokens > 0) || !std::isfinite(rec.d_tokens))
    throw SchemaError("d_tokens", "must be > 0 (run " + rec.run_id + ")");
  if (!(rec.flops > 0) || !std::isfinite(rec.flops))
    throw SchemaError("flops", "must be > 0 (run " + rec.run_id + ")");
  const double ratio = rec.d_tokens / rec.n_params;
  if (!(std::abs(rec.tpr - ratio) <= kTprMatchTolerance * ratio))
    throw SchemaError("tpr", "disagrees with d_tokens / n_params by more than "
                             "1% (run " + rec.run_id + ")");
  for (const auto &obs: rec.observations) {
    if (obs.benchmark.empty())
      throw SchemaError("benchmark", "must be nonempty (run " + rec.run_id + ")");
    if (!(obs.value >= 0 && obs.value <= 1))
      throw SchemaError("value", "must lie in [0, 1] (run " + rec.run_id + ", "
                                     + obs.benchmark + ")");
    const bool is_passk = obs.metric_type == MetricType::kPassAtK;
    if (is_passk != obs.k.has_value())
      throw SchemaError("k", "must be present iff metric_type is pass_at_k (run "
                                 + rec.run_id + ", " + obs.benchmark + ")");
    if (obs.k && *obs.k < 1)
      throw SchemaError("k", "must be >= 1 (run " + rec.run_id + ")");
    for (const auto &[name, v]: obs.proxies)
      if (!std::isfinite(v))
        throw SchemaError("proxy_value", "proxy '" + name + "' is not finite");
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {
  const std::vector<std::string> kCsvColumns = {
    "run_id", "n_params",    "d_tokens", "flops",      "tpr",
    "dataset", "benchmark",  "metric_type", "value",   "k",
    "proxy_name", "proxy_value",
  };

  std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
      return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  std::vector<std::string> split_csv_line(std::string_view line, long lineno) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char ch = line[i];
      if (quoted) {
        if (ch == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cur.push_back(ch);
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (quoted)
      throw ParseError("unterminated quoted field", lineno);
    out.push_back(trim(cur));
    return out;
  }

  double parse_double(const std::string &s, const std::string &field,
                      long lineno) {
    double v = 0;
    const char *first = s.data();
    const char *last = s.data() + s.size();
    if (!s.empty() && *first == '+')
      ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
      throw ParseError("field '" + field + "' is not a number: '" + s + "'",
                       lineno);
    return v;
  }

  int parse_int(const std::string &s, const std::string &field, long lineno) {
    const double v = parse_double(s, field, lineno);
    if (v != std::floor(v) || v < 1 || v > 1e9)
      throw SchemaError(field, "must be a positive integer (line "
                                   + std::to_string(lineno) + ")");
    return static_cast<int>(v);
  }

  std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  bool same_value(double a, double b) {
    return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
  }

  // Accumulates rows/objects into records, enforcing the duplicate rules.
  class RecordBuilder {
  public:
    ExperimentRecord &record(const ExperimentRecord &head) {
      auto it = index_.find(head.run_id);
      if (it == index_.end()) {
        index_.emplace(head.run_id, records_.size());
        records_.push_back(head);
        records_.back().observations.clear();
        return records_.back();
      }
      auto &rec = records_[it->second];
      if (!same_value(rec.n_params, head.n_params))
        throw SchemaError("n_params", "conflicting values for run " + head.run_id);
      if (!same_value(rec.d_tokens, head.d_tokens))
        throw SchemaError("d_tokens", "conflicting values for run " + head.run_id);
      if (!same_value(rec.flops, head.flops))
        throw SchemaError("flops", "conflicting values for run " + head.run_id);
      if (!same_value(rec.tpr, head.tpr))
        throw SchemaError("tpr", "conflicting values for run " + head.run_id);
      if (rec.dataset != head.dataset)
        throw SchemaError("dataset", "conflicting values for run " + head.run_id);
      return rec;
    }

    void add_observation(ExperimentRecord &rec, MetricObservation obs,
                         const std::optional<std::string> &proxy_name,
                         double proxy_value) {
      MetricObservation *existing = nullptr;
      for (auto &o: rec.observations)
        if (o.benchmark == obs.benchmark && o.k == obs.k)
          existing = &o;
      const std::string key = rec.run_id + "/" + obs.benchmark + "/k="
                              + (obs.k ? std::to_string(*obs.k) : "none");
      if (existing == nullptr) {
        if (proxy_name)
          obs.proxies.emplace(*proxy_name, proxy_value);
        rec.observations.push_back(std::move(obs));
        return;
      }
      // A repeated (run_id, benchmark, k) row is only legal when it adds a
      // new proxy for the same observed value.
      if (!proxy_name || existing->proxies.count(*proxy_name) != 0
          || !same_value(existing->value, obs.value)
          || existing->metric_type != obs.metric_type)
        throw SchemaError("run_id", "duplicate observation " + key);
      existing->proxies.emplace(*proxy_name, proxy_value);
    }

    std::vector<ExperimentRecord> finish() {
      for (const auto &rec: records_)
        validate_record(rec);
      return std::move(records_);
    }

  private:
    std::vector<ExperimentRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
  };
}  // namespace

std::vector<ExperimentRecord> parse_experiments_csv(std::string_view text) {
  std::istringstream in{ std::string(text) };
  std::string line;
  long lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_csv_line(line, lineno);
      break;
    }
  }
  if (header.empty())
    throw ParseError("missing CSV header", lineno == 0 ? 1 : lineno);

  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (std::find(kCsvColumns.begin(), kCsvColumns.end(), header[i])
        == kCsvColumns.end())
      throw ParseError("unknown column '" + header[i] + "'", lineno);
    if (!col.emplace(header[i], i).second)
      throw ParseError("duplicate column '" + header[i] + "'", lineno);
  }
  for (const char *required:
       { "run_id", "n_params", "d_tokens", "benchmark", "metric_type", "value" })
    if (col.count(required) == 0)
      throw ParseError("missing required column '" + std::string(required) + "'",
                       lineno);

  RecordBuilder builder;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    auto cells = split_csv_line(line, lineno);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size())
                           + " fields, got " + std::to_string(cells.size()),
                       lineno);
    auto get = [&](const char *name) -> std::string {
      auto it = col.find(name);
      return it == col.end() ? std::string() : cells[it->second];
    };

    ExperimentRecord head;
    head.run_id = get("run_id");
    if (head.run_id.empty())
      throw SchemaError("run_id", "empty at line " + std::to_string(lineno));
    head.n_params = parse_double(get("n_params"), "n_params", lineno);
    head.d_tokens = parse_double(get("d_tokens"), "d_tokens", lineno);
    if (!(head.n_params > 0))
      throw SchemaError("n_params", "must be > 0 (line " + std::to_string(lineno) + ")");
    if (!(head.d_tokens > 0))
      throw SchemaError("d_tokens", "must be > 0 (line " + std::to_string(lineno) + ")");
    const auto flops = get("flops");
    head.flops = flops.empty() ? compute_flops(head.n_params, head.d_tokens)
                               : parse_double(flops, "flops", lineno);
    const auto tpr = get("tpr");
    head.tpr = tpr.empty() ? head.d_tokens / head.n_params
                           : parse_double(tpr, "tpr", lineno);
    head.dataset = get("dataset");

    MetricObservation obs;
    obs.benchmark = get("benchmark");
    obs.metric_type = parse_metric_type(get("metric_type"));
    obs.value = parse_double(get("value"), "value", lineno);
    if (!(obs.value >= 0 && obs.value <= 1))
      throw SchemaError("value", "must lie in [0, 1] (line "
                                     + std::to_string(lineno) + ")");
    const auto k = get("k");
    if (!k.empty())
      obs.k = parse_int(k, "k", lineno);

    std::optional<std::string> proxy_name;
    double proxy_value = 0;
    const auto pn = get("proxy_name");
    const auto pv = get("proxy_value");
    if (!pn.empty()) {
      if (pv.empty())
        throw SchemaError("proxy_value", "missing for proxy '" + pn + "' (line "
                                             + std::to_string(lineno) + ")");
      proxy_name = pn;
      proxy_value = parse_double(pv, "proxy_value", lineno);
    } else if (!pv.empty()) {
      throw SchemaError("proxy_name", "missing for proxy value (line "
                                          + std::to_string(lineno) + ")");
    }

    auto &rec = builder.record(head);
    builder.add_observation(rec, std::move(obs), proxy_name, proxy_value);
  }
  return builder.finish();
}

std::vector<ExperimentRecord> parse_experiments_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    // nlohmann reports a byte offset; translate to a line number.
    long line = 1;
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < upto; ++i)
      line += text[i] == '\n';
    throw ParseError(e.what(), line);
  }
  if (!j.is_array())
    throw SchemaError("records", "top level must be an array of records");

  auto number = [](const nlohmann::json &o, const char *field) {
    if (!o.contains(field) || !o[field].is_number())
      throw SchemaError(field, "missing or not a number");
    return o[field].get<double>();
  };

  RecordBuilder builder;
  for (const auto &o: j) {
    if (!o.is_object())
      throw SchemaError("records", "each record must be an object");
    ExperimentRecord head;
    if (!o.contains("run_id") || !o["run_id"].is_string())
      throw SchemaError("run_id", "missing or not a string");
    head.run_id = o["run_id"].get<std::string>();
    head.n_params = number(o, "n_params");
    head.d_tokens = number(o, "d_tokens");
    if (!(head.n_params > 0))
      throw SchemaError("n_params", "must be > 0 (run " + head.run_id + ")");
    if (!(head.d_tokens > 0))
      throw SchemaError("d_tokens", "must be > 0 (run " + head.run_id + ")");
    head.flops = o.contains("flops") && !o["flops"].is_null()
                     ? number(o, "flops")
                     : compute_flops(head.n_params, head.d_tokens);
    head.tpr = o.contains("tpr") && !o["tpr"].is_null()
                   ? number(o, "tpr")
                   : head.d_tokens / head.n_params;
    head.dataset = o.value("dataset", std::string());
    auto &rec = builder.record(head);

    if (!o.contains("observations"))
      continue;
    if (!o["observations"].is_array())
      throw SchemaError("observations", "must be an array");
    for (const auto &jo: o["observations"]) {
      MetricObservation obs;
      if (!jo.contains("benchmark") || !jo["benchmark"].is_string())
        throw SchemaError("benchmark", "missing or not a string");
      obs.benchmark = jo["benchmark"].get<std::string>();
      if (!jo.contains("metric_type") || !jo["metric_type"].is_string())
        throw SchemaError("metric_type", "missing or not a string");
      obs.metric_type = parse_metric_type(jo["metric_type"].get<std::string>());
      obs.value = number(jo, "value");
      if (!(obs.value >= 0 && obs.value <= 1))
        throw SchemaError("value", "must lie in [0, 1] (run " + head.run_id + ")");
      if (jo.contains("k") && !jo["k"].is_null()) {
        if (!jo["k"].is_number_integer() || jo["k"].get<long>() < 1)
          throw SchemaError("k", "must be a positive integer");
        obs.k = jo["k"].get<int>();
      }
      if (rec.find(obs.benchmark, obs.k) != nullptr)
        throw SchemaError("run_id", "duplicate observation " + head.run_id + "/"
                                        + obs.benchmark);
      if (jo.contains("proxies")) {
        if (!jo["proxies"].is_object())
          throw SchemaError("proxies", "must be an object");
        for (const auto &[name, v]: jo["proxies"].items()) {
          if (!v.is_number())
            throw SchemaError("proxy_value", "proxy '" + name + "' not a number");
          obs.proxies.emplace(name, v.get<double>());
        }
      }
      rec.observations.push_back(std::move(obs));
    }
  }
  return builder.finish();
}

DataFormat format_from_path(const std::filesystem::path &path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".json")
    return DataFormat::kJson;
  if (ext == ".csv")
    return DataFormat::kCsv;
  throw InvalidArgument("cannot infer data format from extension of "
                        + path.string());
}

std::vector<ExperimentRecord> load_experiments(const std::filesystem::path &path,
                                               DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return format == DataFormat::kCsv ? parse_experiments_csv(ss.str())
                                    : parse_experiments_json(ss.str());
}

std::vector<ExperimentRecord>
load_experiments(const std::filesystem::path &path) {
  return load_experiments(path, format_from_path(path));
}

std::string experiments_to_csv(const std::vector<ExperimentRecord> &records) {
  std::string out;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    out += kCsvColumns[i];
    out += i + 1 < kCsvColumns.size() ? ',' : '\n';
  }
  for (const auto &rec: records) {
    const std::string head = rec.run_id + "," + fmt_double(rec.n_params) + ","
                             + fmt_double(rec.d_tokens) + ","
                             + fmt_double(rec.flops) + "," + fmt_double(rec.tpr)
                             + "," + rec.dataset + ",";
    for (const auto &obs: rec.observations) {
      const std::string body = obs.benchmark + ","
                               + std::string(to_string(obs.metric_type)) + ","
                               + fmt_double(obs.value) + ","
                               + (obs.k ? std::to_string(*obs.k) : "") + ",";
      if (obs.proxies.empty()) {
        out += head + body + ",\n";
        continue;
      }
      for (const auto &[name, v]: obs.proxies)
        out += head + body + name + "," + fmt_double(v) + "\n";
    }
  }
  return out;
}

nlohmann::json
experiments_to_json(const std::vector<ExperimentRecord> &records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &rec: records) {
    nlohmann::json obs_arr = nlohmann::json::array();
    for (const auto &obs: rec.observations) {
      nlohmann::json o = { { "benchmark", obs.benchmark },
                           { "metric_type", std::string(to_string(obs.metric_type)) },
                           { "value", obs.value } };
      if (obs.k)
        o["k"] = *obs.k;
      nlohmann::json proxies = nlohmann::json::object();
      for (const auto &[name, v]: obs.proxies)
        proxies[name] = v;
      o["proxies"] = proxies;
      obs_arr.push_back(std::move(o));
    }
    arr.push_back({ { "run_id", rec.run_id },
                    { "n_params", rec.n_params },
                    { "d_tokens", rec.d_tokens },
                    { "flops", rec.flops },
                    { "tpr", rec.tpr },
                    { "dataset", rec.dataset },
                    { "observations", obs_arr } });
  }
  return arr;
}

}  // namespace scalelaw
