#include "incube/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "incube/codebook.hpp"
#include "incube/cube.hpp"
#include "incube/error.hpp"
#include "incube/ingest.hpp"
#include "incube/mining.hpp"
#include "incube/service.hpp"
#include "incube/snapshot.hpp"
#include "incube/strings.hpp"
#include "incube/synthetic.hpp"

namespace incube {

namespace {

// Raised for bad flag values discovered after CLI11 parsing.
struct UsageError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

const CodebookTables& codebook() {
  static const CodebookTables* tables = []() -> const CodebookTables* {
    if (const char* dir = std::getenv("INCUBE_CODEBOOK_DIR"); dir && *dir)
      return new CodebookTables(CodebookTables::load(dir));
    return &CodebookTables::builtin();
  }();
  return *tables;
}

char parse_delimiter(const std::string& s) {
  if (s == "\\t" || s == "tab" || s == "\t") return '\t';
  if (s.size() != 1) throw UsageError("delimiter must be a single character, 'tab' or '\\t'");
  return s[0];
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return in;
}

// Writes to the named file, or to `fallback` when the path is empty.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw IoError("cannot write " + path);
    stream_ = file_.get();
  }
  std::ostream& stream() { return *stream_; }
  void finish(const std::string& path) {
    stream_->flush();
    if (!*stream_) throw IoError("cannot write " + (path.empty() ? std::string("output") : path));
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

struct InputOptions {
  std::string in;
  std::string delimiter = ",";
  std::string alias_map;
};

void add_input_options(CLI::App* app, InputOptions& o, bool required) {
  auto* opt = app->add_option("--in", o.in, "Incident file (delimited, header row)");
  if (required) opt->required();
  app->add_option("--delimiter", o.delimiter, "Field delimiter: a character, 'tab' or '\\t'");
  app->add_option("--alias-map", o.alias_map, "Two-column file mapping header names to codebook columns");
}

IngestResult run_ingest(const InputOptions& o) {
  std::optional<HeaderAliases> aliases;
  if (!o.alias_map.empty()) {
    auto in = open_in(o.alias_map);
    aliases = load_alias_map(in);
  }
  auto in = open_in(o.in);
  try {
    return ingest_stream(in, codebook(), parse_delimiter(o.delimiter), aliases ? &*aliases : nullptr);
  } catch (const ParseError& e) {
    throw IoError(o.in + ": " + e.what());
  }
}

void summarize(const IngestResult& r, std::ostream& err) {
  std::size_t errors = 0;
  for (const auto& v : r.violations)
    if (v.severity == Severity::kError) ++errors;
  err << r.records << " records, " << r.accepted.size() << " accepted, " << errors << " errors, "
      << r.violations.size() - errors << " warnings\n";
}

std::string snapshot_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("INCUBE_SNAPSHOT"); env && *env) return env;
  throw UsageError("no snapshot given: pass --snapshot or set INCUBE_SNAPSHOT");
}

FactTable open_snapshot(const std::string& flag) { return load_snapshot(snapshot_path(flag), codebook().version()); }

struct QueryOptions {
  std::vector<std::string> group_by;
  std::vector<std::string> filters;
  std::vector<std::string> measures;
  std::string spec;
};

void add_query_options(CLI::App* app, QueryOptions& o) {
  app->add_option("--group-by", o.group_by, "Level to group on, e.g. space:2 or time.year (repeatable)")
      ->delimiter(',');
  app->add_option("--filter", o.filters, "Member filter dim=a|b, e.g. space:1=South Asia (repeatable)");
  app->add_option("--measure", o.measures, "Measure name (repeatable)")->delimiter(',');
  app->add_option("--spec", o.spec, "JSON query spec file; flags add to it");
}

CellQuery build_query(const QueryOptions& o) {
  CellQuery q;
  if (!o.spec.empty()) {
    auto in = open_in(o.spec);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw UsageError(o.spec + " is not valid JSON");
    q = query_from_json(j);
  }
  for (const auto& g : o.group_by) q.group_by.push_back(parse_level_ref(g));
  for (const auto& f : o.filters) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw UsageError("filter '" + f + "' is not of the form dim=member|member");
    const GroupBy ref = parse_level_ref(f.substr(0, eq));
    Filter filter{ref.hierarchy, ref.depth, {}, std::nullopt};
    for (const auto& m : split(f.substr(eq + 1), '|')) filter.members.emplace_back(trim(m));
    q.filters.push_back(std::move(filter));
  }
  for (const auto& m : o.measures) q.measures.push_back(m);
  return q;
}

std::vector<std::string> list_or(const std::vector<std::string>& v, const std::vector<std::string>& fallback) {
  return v.empty() ? fallback : v;
}

std::string render_elements(const std::vector<Itemset>& elements) {
  std::vector<std::string> parts;
  for (const auto& e : elements) parts.push_back("{" + join(e, ";") + "}");
  return join(parts, " -> ");
}

std::pair<std::string, int> parse_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw UsageError("--addr must be host:port");
  const auto port = parse_int(addr.substr(colon + 1));
  if (!port || *port < 0 || *port > 65535) throw UsageError("bad port in --addr '" + addr + "'");
  return {addr.substr(0, colon), static_cast<int>(*port)};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incident cube: ingest, validate, build, query, mine, serve, generate"};
  app.name("incube");
  app.require_subcommand(1);

  InputOptions input;
  QueryOptions query_opts;
  std::string out_path, report_path, snapshot_flag, addr = "127.0.0.1:8080", profile = "default", format = "csv";
  bool strict = false;
  double min_support = -1, min_confidence = 0.5, threshold = 3.5;
  std::uint64_t seed = 1;
  std::size_t n = 1000;
  std::vector<std::string> dims, keys;

  auto* ingest = app.add_subcommand("ingest", "Validate incidents and write the accepted ones");
  add_input_options(ingest, input, true);
  ingest->add_option("--out", out_path, "Accepted incidents (default stdout)");
  ingest->add_option("--report", report_path, "Violation report file");
  ingest->add_flag("--strict", strict, "Exit 3 when any record has an Error violation");

  auto* validate = app.add_subcommand("validate", "Write the violation report of an incident file");
  add_input_options(validate, input, true);
  validate->add_option("--out", out_path, "Report file (default stdout)");
  validate->add_flag("--strict", strict, "Exit 3 when any record has an Error violation");

  auto* build = app.add_subcommand("build", "Build a cube snapshot from an incident file");
  add_input_options(build, input, true);
  build->add_option("--snapshot,--out", snapshot_flag, "Snapshot file to write");
  build->add_flag("--strict", strict, "Refuse to build when any record has an Error violation");

  auto* query = app.add_subcommand("query", "Aggregate a snapshot");
  query->add_option("--snapshot", snapshot_flag, "Snapshot file (default $INCUBE_SNAPSHOT)");
  add_query_options(query, query_opts);
  query->add_option("--delimiter", input.delimiter, "Output delimiter");
  query->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  query->add_option("--out", out_path, "Output file (default stdout)");

  auto* mine = app.add_subcommand("mine", "Association rules, sequential patterns or outliers");
  mine->require_subcommand(1);
  auto add_mine_source = [&](CLI::App* sub) {
    sub->add_option("--snapshot", snapshot_flag, "Snapshot file (default $INCUBE_SNAPSHOT)");
    add_input_options(sub, input, false);
    sub->add_option("--out", out_path, "Output file (default stdout)");
  };
  auto* rules = mine->add_subcommand("rules", "Apriori association rules");
  add_mine_source(rules);
  rules->add_option("--min-support", min_support, "Minimum support in (0, 1] (default 0.1)");
  rules->add_option("--min-confidence", min_confidence, "Minimum confidence in (0, 1]");
  rules->add_option("--dims", dims, "Item dimensions")->delimiter(',');
  auto* sequences = mine->add_subcommand("sequences", "Sequential patterns per entity");
  add_mine_source(sequences);
  sequences->add_option("--min-support", min_support, "Minimum number of entities (default 2)");
  sequences->add_option("--key", keys, "Entity key dimensions (default gname)")->delimiter(',');
  sequences->add_option("--dims", dims, "Item dimensions (default attack)")->delimiter(',');
  auto* outliers = mine->add_subcommand("outliers", "Robust z-scores of aggregate cells");
  outliers->add_option("--snapshot", snapshot_flag, "Snapshot file (default $INCUBE_SNAPSHOT)");
  add_query_options(outliers, query_opts);
  outliers->add_option("--threshold", threshold, "Flag cells with |score| above this");
  outliers->add_option("--out", out_path, "Output file (default stdout)");

  auto* serve = app.add_subcommand("serve", "Serve a snapshot over HTTP");
  serve->add_option("--snapshot", snapshot_flag, "Snapshot file (default $INCUBE_SNAPSHOT)");
  serve->add_option("--addr", addr, "host:port to listen on");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic incident file");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--n", n, "Number of incidents");
  gen->add_option("--profile", profile, "default, dense, sparse or a JSON profile file");
  gen->add_option("--out", out_path, "Output file (default stdout)");
  gen->add_option("--delimiter", input.delimiter, "Output delimiter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) {
      const IngestResult r = run_ingest(input);
      Output o(out_path, out);
      write_incidents(o.stream(), r.accepted, parse_delimiter(input.delimiter));
      o.finish(out_path);
      if (!report_path.empty()) {
        Output rep(report_path, err);
        write_violation_report(rep.stream(), r.violations);
        rep.finish(report_path);
      }
      summarize(r, err);
      return strict && has_errors(r.violations) ? kExitValidation : kExitOk;
    }
    if (*validate) {
      const IngestResult r = run_ingest(input);
      Output o(out_path, out);
      write_violation_report(o.stream(), r.violations);
      o.finish(out_path);
      summarize(r, err);
      return strict && has_errors(r.violations) ? kExitValidation : kExitOk;
    }
    if (*build) {
      const IngestResult r = run_ingest(input);
      summarize(r, err);
      if (strict && has_errors(r.violations)) return kExitValidation;
      const FactTable t = build_facts(r.accepted, codebook());
      save_snapshot(t, snapshot_path(snapshot_flag));
      return kExitOk;
    }
    if (*query) {
      const FactTable t = open_snapshot(snapshot_flag);
      const CellQuery q = normalize_query(t, build_query(query_opts));
      const CellResult r = aggregate(t, q);
      Output o(out_path, out);
      if (format == "json")
        o.stream() << query_response_json(q, r).dump() << '\n';
      else
        write_result(o.stream(), r, parse_delimiter(input.delimiter));
      o.finish(out_path);
      return kExitOk;
    }
    if (*rules || *sequences) {
      std::optional<FactTable> table;
      std::optional<IngestResult> ingested;
      if (!input.in.empty()) {
        ingested = run_ingest(input);
        summarize(*ingested, err);
      } else {
        table = open_snapshot(snapshot_flag);
      }
      Output o(out_path, out);
      if (*rules) {
        const double support = min_support < 0 ? 0.1 : min_support;
        const auto item_dims = list_or(dims, default_item_dimensions());
        const auto ts = table ? transactions_from_facts(*table, item_dims)
                              : build_transactions(ingested->accepted, item_dims, codebook());
        const auto found = mine_association_rules(ts, support, min_confidence);
        o.stream() << format_row({"antecedent", "consequent", "count", "support", "confidence", "lift"}, ',') << '\n';
        for (const auto& r : found)
          o.stream() << format_row({join(r.antecedent, ";"), join(r.consequent, ";"), std::to_string(r.count),
                                    fmt_double(r.support), fmt_double(r.confidence), fmt_double(r.lift)},
                                   ',')
                     << '\n';
      } else {
        if (min_support >= 0 &&
            (min_support < 1 || min_support != static_cast<double>(static_cast<std::size_t>(min_support))))
          throw MiningError("min_support must be an integer of at least 1");
        const std::size_t support = min_support < 0 ? 2 : static_cast<std::size_t>(min_support);
        const auto key_dims = list_or(keys, {"gname"});
        const auto item_dims = list_or(dims, {"attack"});
        const auto ss = table ? sequences_from_facts(*table, key_dims, item_dims)
                              : build_sequences(ingested->accepted, key_dims, item_dims, codebook());
        const auto found = mine_sequences(ss, support);
        o.stream() << format_row({"pattern", "items", "support"}, ',') << '\n';
        for (const auto& p : found)
          o.stream() << format_row(
                            {render_elements(p.elements), std::to_string(p.item_count()), std::to_string(p.support)},
                            ',')
                     << '\n';
      }
      o.finish(out_path);
      return kExitOk;
    }
    if (*outliers) {
      const FactTable t = open_snapshot(snapshot_flag);
      const CellQuery q = normalize_query(t, build_query(query_opts));
      const Series s = series_from_result(aggregate(t, q), q.measures.front());
      const auto reports = score_outliers(s.values, threshold, s.labels, q.measures.front());
      Output o(out_path, out);
      o.stream() << format_row({"label", "measure", "value", "score", "flagged", "method"}, ',') << '\n';
      for (const auto& r : reports)
        o.stream() << format_row({r.label, r.measure, fmt_double(r.value), fmt_double(r.score), r.flagged ? "1" : "0",
                                  r.method},
                                 ',')
                   << '\n';
      o.finish(out_path);
      return kExitOk;
    }
    if (*serve) {
      auto t = std::make_shared<const FactTable>(open_snapshot(snapshot_flag));
      const auto [host, port] = parse_addr(addr);
      CubeService service;
      service.load(std::move(t));
      err << "listening on " << host << ":" << port << "\n";
      if (!service.listen(host, port)) throw IoError("cannot listen on " + addr);
      return kExitOk;
    }
    if (*gen) {
      GeneratorProfile p;
      if (profile == "default" || profile == "dense" || profile == "sparse") {
        p = GeneratorProfile::named(profile);
      } else {
        auto in = open_in(profile);
        std::stringstream buf;
        buf << in.rdbuf();
        p = GeneratorProfile::from_json(buf.str());
      }
      const auto incidents = generate_synthetic(seed, n, p, codebook());
      Output o(out_path, out);
      write_incidents(o.stream(), incidents, parse_delimiter(input.delimiter));
      o.finish(out_path);
      return kExitOk;
    }
  } catch (const SnapshotError& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == SnapshotError::Kind::kVersionMismatch ? kExitVersion : kExitIo;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace incube
