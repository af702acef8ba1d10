#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "domcheck/corpus.hpp"
#include "domcheck/document.hpp"
#include "domcheck/hierarchy.hpp"
#include "domcheck/majorization.hpp"
#include "domcheck/order.hpp"
#include "domcheck/schur.hpp"

namespace domcheck {

enum class Outcome { pass, violated, inconclusive };

struct Verdict {
  std::string check;
  std::string verdict;
  Outcome outcome = Outcome::pass;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::optional<Certificate> certificate;
};

struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;  // argument name, digest
  std::vector<Verdict> verdicts;
  ToleranceConfig config;
  std::int64_t runtime_ms = 0;
  Json result = Json::object();

  /// 1 if anything was violated, else 2 if anything was inconclusive, else 0.
  int exit_code() const {
    bool inconclusive = false;
    for (const auto& v : verdicts) {
      if (v.outcome == Outcome::violated) return 1;
      inconclusive = inconclusive || v.outcome == Outcome::inconclusive;
    }
    return inconclusive ? 2 : 0;
  }
};

inline constexpr int kExitInputError = 3;

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return "sha256:" + out.str();
}

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::violated: return "violated";
    case Outcome::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline Json config_json(const ToleranceConfig& c) {
  Json j;
  j["tol_psd"] = c.tol_psd;
  j["tol_eig"] = c.tol_eig;
  j["tol_herm"] = c.tol_herm;
  j["tol_cert"] = c.tol_cert;
  j["max_iters"] = c.max_iters;
  j["restarts"] = c.restarts;
  j["seed"] = c.seed;
  return j;
}

/// Certificates appear as digests unless `full_certificates` is set.
inline Json report_json(const Report& r, bool full_certificates = false) {
  Json j;
  j["command"] = r.command;
  j["inputs"] = Json::object();
  for (const auto& [name, digest] : r.inputs) j["inputs"][name] = digest;
  j["verdicts"] = Json::array();
  for (const auto& v : r.verdicts) {
    Json row;
    row["check"] = v.check;
    row["verdict"] = v.verdict;
    row["outcome"] = to_string(v.outcome);
    row["value"] = v.value;
    if (v.certificate) {
      const Json cert = certificate_json(*v.certificate);
      row["certificate_digest"] = sha256_hex(cert.dump());
      if (full_certificates) row["certificate"] = cert;
    } else {
      row["certificate_digest"] = nullptr;
    }
    j["verdicts"].push_back(std::move(row));
  }
  j["result"] = r.result;
  j["config"] = config_json(r.config);
  j["exit_code"] = r.exit_code();
  j["runtime_ms"] = r.runtime_ms;
  return j;
}

/// Drops every "runtime_ms" field, leaving what must be reproducible.
inline Json strip_timing(Json j) {
  if (j.is_object()) {
    j.erase("runtime_ms");
    for (auto& [_, v] : j.items()) v = strip_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_timing(v);
  }
  return j;
}

namespace cli_detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Context {
  ToleranceConfig tol;
  Report report;

  DocumentEnvelope load(const std::string& name, const std::string& path) {
    DocumentEnvelope d;
    try {
      d = parse_document(read_file(path));
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + e.detail());
    }
    report.inputs.emplace_back(name, sha256_hex(serialize(d)));
    return d;
  }

  ComplexMatrix matrix(const std::string& name, const std::string& path) {
    const auto d = load(name, path);
    if (d.kind != DocumentKind::matrix && d.kind != DocumentKind::symbol)
      throw Error(ErrorCode::SchemaError, path + ": field 'kind': expected a matrix document");
    return d.matrix;
  }

  SingularSpectrum spectrum(const std::string& name, const std::string& path) {
    const auto d = load(name, path);
    if (d.kind == DocumentKind::spectrum) return SingularSpectrum(d.spectrum, tol);
    if (d.kind == DocumentKind::matrix) return singular_spectrum(d.matrix, tol);
    throw Error(ErrorCode::SchemaError, path + ": field 'kind': expected a matrix or spectrum document");
  }

  SuperOperator map(const std::string& name, const std::string& path) { return load(name, path).to_map(tol); }

  void add(std::string check, std::string verdict, Outcome outcome, double value = std::numeric_limits<double>::quiet_NaN(),
           std::optional<Certificate> cert = std::nullopt) {
    report.verdicts.push_back({std::move(check), std::move(verdict), outcome, value, std::move(cert)});
  }

  void add_bool(std::string check, bool holds, double value = std::numeric_limits<double>::quiet_NaN(),
                std::optional<Certificate> cert = std::nullopt) {
    add(std::move(check), holds ? "true" : "false", holds ? Outcome::pass : Outcome::violated, value, std::move(cert));
  }

  void add_status(std::string check, const MapVerdict& v) {
    const Outcome o = v.holds() ? Outcome::pass : v.status == Status::violated ? Outcome::violated : Outcome::inconclusive;
    add(std::move(check), to_string(v.status), o, v.value, v.certificate);
  }
};

inline Json real_array(const RealVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Partition parse_blocks(const std::string& text) {
  Partition p;
  std::stringstream blocks(text);
  std::string block;
  while (std::getline(blocks, block, ';')) {
    std::vector<Eigen::Index> b;
    std::stringstream items(block);
    std::string item;
    while (std::getline(items, item, ',')) {
      try {
        b.push_back(std::stol(item));
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::BadPartition, "bad index '" + item + "' in --blocks");
      }
    }
    p.push_back(std::move(b));
  }
  return p;
}

inline Order parse_order(const std::string& s) {
  if (s == "positive") return Order::positive;
  if (s == "complete") return Order::complete;
  throw Error(ErrorCode::BadConfig, "--order must be positive or complete");
}

inline void print_text(std::ostream& out, const Report& r) {
  out << r.command << "\n";
  for (const auto& v : r.verdicts) {
    out << "  " << v.check << ": " << v.verdict;
    if (!std::isnan(v.value)) out << " (" << std::setprecision(12) << v.value << ")";
    out << "\n";
  }
  if (!r.result.empty()) out << "  result: " << r.result.dump() << "\n";
}

}  // namespace cli_detail

struct CommandResult {
  int exit_code = 0;
  std::optional<Report> report;
};

/// Runs one command line (argv[0] is the subcommand, not the program name).
/// Reports go to `out`, diagnostics to `err`.
inline CommandResult run_command(std::vector<std::string> argv, std::ostream& out, std::ostream& err) {
  using cli_detail::Context;
  CLI::App app{"Positivity, domination and majorization checks for matrix maps", "domcheck"};
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  if (const char* env = std::getenv("DOMCHECK_TOL")) {
    try {
      ctx.tol.tol_cert = std::stod(env);
    } catch (const std::logic_error&) {
      err << "error: DOMCHECK_TOL='" << env << "' is not a number\n";
      return {kExitInputError, std::nullopt};
    }
  }
  std::string format = "text", out_path;
  app.add_option("--tol", ctx.tol.tol_cert, "certificate tolerance (default 1e-7, or DOMCHECK_TOL)");
  app.add_option("--seed", ctx.tol.seed, "random seed");
  app.add_option("--restarts", ctx.tol.restarts, "see-saw restarts");
  app.add_option("--max-iters", ctx.tol.max_iters, "iteration budget");
  app.add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--out", out_path, "write the JSON report with full certificates here");

  std::string in, x_path, y_path, a_path, s_path, t_path, map_path, psi_path, gauge = "schatten:1", blocks, property,
      order = "complete";
  std::vector<std::string> generators;
  Eigen::Index block = 1, cut = 0, tail = -1;
  int chain_n = 1, m = 0;
  double c = 0.0;
  std::string corpus_id;

  auto* sv = app.add_subcommand("sv", "singular values of a matrix");
  sv->add_option("--in", in, "matrix document")->required();
  auto* norm = app.add_subcommand("norm", "unitarily invariant norm of a matrix");
  norm->add_option("--in", in, "matrix document")->required();
  norm->add_option("--gauge", gauge, "schatten:<p>, schatten:inf, kyfan:<k>, trace, operator");
  auto* subm = app.add_subcommand("submajorize", "is y weakly submajorized by x");
  subm->add_option("--x", x_path, "matrix or spectrum")->required();
  subm->add_option("--y", y_path, "matrix or spectrum")->required();
  auto* transfer = app.add_subcommand("transfer", "doubly substochastic D with D mu_x = mu_y");
  transfer->add_option("--x", x_path, "matrix or spectrum")->required();
  transfer->add_option("--y", y_path, "matrix or spectrum")->required();
  auto* pinch_cmd = app.add_subcommand("pinch", "block-diagonal pinching");
  pinch_cmd->add_option("--in", in, "matrix document")->required();
  auto* block_opt = pinch_cmd->add_option("--block", block, "contiguous block size");
  pinch_cmd->add_option("--blocks", blocks, "explicit blocks, e.g. 0,1;2")->excludes(block_opt);
  auto* member = app.add_subcommand("interval-member", "is 0 <= x <= a");
  member->add_option("--a", a_path, "upper endpoint")->required();
  member->add_option("--x", x_path, "candidate")->required();
  auto* param = app.add_subcommand("interval-param", "w with x = a^{1/4} w a^{1/4}");
  param->add_option("--a", a_path, "upper endpoint")->required();
  param->add_option("--x", x_path, "member of [0, a]")->required();
  auto* psol = app.add_subcommand("psol-member", "is x in the positive solid of the generators");
  psol->add_option("--gen", generators, "generator matrix (repeatable)")->required();
  psol->add_option("--x", x_path, "candidate")->required();
  auto* offdiag = app.add_subcommand("offdiag-verify", "off-diagonal truncation inequality");
  offdiag->add_option("--map", map_path, "positive map")->required();
  offdiag->add_option("--x", x_path, "PSD matrix")->required();
  offdiag->add_option("--cut", cut, "cut level n")->required();
  offdiag->add_option("--gauge", gauge, "norm on the target");
  auto* chain = app.add_subcommand("chain", "monotone chain with large gaps under x");
  chain->add_option("--x", x_path, "PSD matrix")->required();
  chain->add_option("--n", chain_n, "chain length")->required();
  auto* check_map = app.add_subcommand("check-map", "positivity hierarchy of a map");
  check_map->add_option("--in", in, "map document")->required();
  check_map->add_option("--property", property, "positive, cp, kpositive:<k>, decomposable")->required();
  auto* dom = app.add_subcommand("dominates", "0 <= T <= S or 0 <= T <=_c S");
  dom->add_option("--s", s_path, "dominating map")->required();
  dom->add_option("--t", t_path, "dominated map")->required();
  dom->add_option("--order", order, "positive or complete");
  auto* schur = app.add_subcommand("schur", "Schur multiplier checks");
  schur->add_option("--in", in, "symbol document")->required();
  schur->add_option("--tail", tail, "tail score beyond this index");
  auto* psi_opt = schur->add_option("--psi", psi_path, "dominating symbol for the obstruction search");
  schur->add_option("--c", c, "entry threshold")->needs(psi_opt);
  schur->add_option("--m", m, "number of heavy entries")->needs(psi_opt);
  auto* corpus = app.add_subcommand("corpus", "reproduce the built-in examples");
  corpus->require_subcommand(1);
  auto* corpus_list = corpus->add_subcommand("list", "list item ids");
  auto* corpus_run_cmd = corpus->add_subcommand("run", "run one item or all");
  corpus_run_cmd->add_option("id", corpus_id, "item id or 'all'")->required();
  for (auto* sub : {sv, norm, subm, transfer, pinch_cmd, member, param, psol, offdiag, chain, check_map, dom, schur,
                    corpus, corpus_list, corpus_run_cmd})
    sub->fallthrough();

  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return {0, std::nullopt};
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return {0, std::nullopt};
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return {kExitInputError, std::nullopt};
  }

  const auto start = std::chrono::steady_clock::now();
  auto& rep = ctx.report;
  try {
    ctx.tol.validate();
    rep.config = ctx.tol;
    const auto& tol = ctx.tol;
    if (sv->parsed()) {
      rep.command = "sv";
      const auto mu = singular_spectrum(ctx.matrix("in", in), tol);
      rep.result["spectrum"] = cli_detail::real_array(mu.values());
      ctx.add("singular values", "computed", Outcome::pass, mu[0]);
    } else if (norm->parsed()) {
      rep.command = "norm";
      const Gauge g = Gauge::parse(gauge);
      const double v = symmetric_norm(ctx.matrix("in", in), g, tol);
      rep.result["gauge"] = g.to_string();
      rep.result["norm"] = v;
      ctx.add("norm", "computed", Outcome::pass, v);
    } else if (subm->parsed() || transfer->parsed()) {
      rep.command = subm->parsed() ? "submajorize" : "transfer";
      const auto x = ctx.spectrum("x", x_path), y = ctx.spectrum("y", y_path);
      const double slack = detail::submajorization_slack(x, y);
      const bool holds = submajorizes(x, y, tol);
      ctx.add_bool("y submajorized by x", holds, slack);
      if (transfer->parsed() && holds) {
        const auto d = transfer_certificate(x, y, tol);
        const bool ok = verify_transfer(d, x, y, tol.tol_cert);
        Json rows = Json::array();
        for (Eigen::Index i = 0; i < d.entries.rows(); ++i) rows.push_back(cli_detail::real_array(d.entries.row(i).transpose()));
        rep.result["transfer"] = rows;
        ctx.add_bool("transfer certificate verifies", ok);
      }
    } else if (pinch_cmd->parsed()) {
      rep.command = "pinch";
      const ComplexMatrix x = ctx.matrix("in", in);
      if (block < 1) throw Error(ErrorCode::BadPartition, "--block must be positive");
      const Partition p = blocks.empty() ? contiguous_blocks(x.rows(), block) : cli_detail::parse_blocks(blocks);
      const ComplexMatrix e = pinch(x, p);
      rep.result["matrix"] = matrix_json(e);
      const bool weak = submajorizes(singular_spectrum(x, tol), singular_spectrum(e, tol), tol);
      ctx.add_bool("pinching submajorized by input", weak);
    } else if (member->parsed() || param->parsed()) {
      rep.command = member->parsed() ? "interval-member" : "interval-param";
      const OrderInterval interval(ctx.matrix("a", a_path), tol);
      const ComplexMatrix x = ctx.matrix("x", x_path);
      const auto v = interval_member(interval, x, tol);
      ctx.add_bool("0 <= x <= a", v.member, v.min_eigenvalue, v.certificate);
      if (param->parsed() && v.member) {
        const ComplexMatrix w = interval_parameterize(interval, x, tol);
        const ComplexMatrix root = spectral_power(interval.upper(), 0.25, tol);
        const double residual = (root * w * root - x).norm();
        rep.result["w"] = matrix_json(w);
        ctx.add_bool("x reconstructed from w", residual <= tol.tol_cert * std::max(1.0, x.norm()), residual);
        const double wn = operator_norm(w, tol), bound = std::sqrt(operator_norm(interval.upper(), tol));
        ctx.add_bool("||w|| <= ||a||^(1/2)", wn <= bound + tol.tol_cert, wn);
      }
    } else if (psol->parsed()) {
      rep.command = "psol-member";
      std::vector<ComplexMatrix> gens;
      for (std::size_t i = 0; i < generators.size(); ++i)
        gens.push_back(ctx.matrix("gen" + std::to_string(i), generators[i]));
      const ComplexMatrix x = ctx.matrix("x", x_path);
      const auto v = psol_member(gens, x, tol);
      if (v.index) rep.result["generator"] = *v.index;
      ctx.add_bool("x in positive solid", v.member, v.min_eigenvalue, v.certificate);
    } else if (offdiag->parsed()) {
      rep.command = "offdiag-verify";
      const SuperOperator t = ctx.map("map", map_path);
      const ComplexMatrix x = ctx.matrix("x", x_path);
      const auto r = verify_offdiag_inequality(t, x, Truncation(cut, x.rows()), Gauge::parse(gauge), tol);
      const Outcome map_outcome = r.map_status == Status::violated      ? Outcome::violated
                                  : r.map_status == Status::inconclusive ? Outcome::inconclusive
                                                                         : Outcome::pass;
      ctx.add("map positive", to_string(r.map_status), map_outcome);
      ctx.add_bool("||Tb||^2 <= 4 ||TQx|| ||TRx||", r.holds, r.lhs);
      ctx.add_bool("||Tb||^2 <= 16 nu ||TQx|| ||TRx||", r.general_holds, r.lhs);
      ctx.add_bool("||Tb|| <= ||T a(t*)||", r.interpolation_holds, r.interpolation_norm);
      ctx.add_bool("||b|| <= 2 (||Rx|| ||Qx||)^(1/2)", r.scalar_holds, r.scalar_lhs);
      rep.result = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"general_rhs", r.general_rhs}, {"ratio", r.ratio},
                    {"t_star", r.t_star}, {"scalar_lhs", r.scalar_lhs}, {"scalar_rhs", r.scalar_rhs},
                    {"zero_denominator", r.zero_denominator}};
    } else if (chain->parsed()) {
      rep.command = "chain";
      const auto ch = monotone_chain(ctx.matrix("x", x_path), chain_n, tol);
      ctx.add_bool("chain decreasing", ch.monotone);
      const double smallest = ch.gaps.empty() ? 0.0 : *std::min_element(ch.gaps.begin(), ch.gaps.end());
      ctx.add_bool("every gap > 2/3", ch.gaps_exceed, smallest);
      rep.result["c"] = ch.c;
      rep.result["gaps"] = ch.gaps;
    } else if (check_map->parsed()) {
      rep.command = "check-map";
      const SuperOperator t = ctx.map("in", in);
      MapVerdict v;
      if (property == "positive") v = check_positive(t, tol);
      else if (property == "cp") v = check_cp(t, tol);
      else if (property == "decomposable") v = check_decomposable(t, tol);
      else if (property.rfind("kpositive:", 0) == 0) {
        int k = 0;
        try {
          k = std::stoi(property.substr(10));
        } catch (const std::logic_error&) {
          throw Error(ErrorCode::BadK, "bad k in '" + property + "'");
        }
        v = check_k_positive(t, k, tol);
      } else {
        throw Error(ErrorCode::BadConfig, "unknown property '" + property + "'");
      }
      rep.result["rule"] = v.rule;
      ctx.add_status(property, v);
    } else if (dom->parsed()) {
      rep.command = "dominates";
      const Order o = cli_detail::parse_order(order);
      const SuperOperator s = ctx.map("s", s_path), t = ctx.map("t", t_path);
      const auto v = dominates(s, t, o, tol);
      ctx.add_status("T positive", v.lower);
      ctx.add_status(o == Order::complete ? "S - T completely positive" : "S - T positive", v.gap);
      const Outcome outcome = v.holds() ? Outcome::pass : v.status == Status::violated ? Outcome::violated
                                                                                     : Outcome::inconclusive;
      ctx.add("dominates", v.holds() ? "dominated" : v.status == Status::violated ? "not dominated" : "inconclusive",
              outcome);
      rep.result["order"] = to_string(o);
      rep.result["status"] = to_string(v.status);
    } else if (schur->parsed()) {
      rep.command = "schur";
      const SchurSymbol phi(ctx.matrix("in", in));
      ctx.add_bool("formally positive", formally_positive(phi, tol));
      if (tail >= 0) {
        const auto r = dp_tail_score(phi, tail);
        rep.result["tail_score"] = r.score;
        ctx.add("tail score", "computed", Outcome::pass, r.score);
      }
      if (!psi_path.empty()) {
        const SchurSymbol psi(ctx.matrix("psi", psi_path));
        const auto r = finite_domination_obstruction(phi, psi, c, m, tol);
        rep.result["preconditions_hold"] = r.preconditions_hold;
        rep.result["precondition_failures"] = r.precondition_failures;
        rep.result["exhaustive"] = r.exhaustive;
        rep.result["subsets_examined"] = r.subsets_examined;
        rep.result["indices"] = r.indices;
        rep.result["message"] = r.message;
        std::optional<Certificate> cert;
        double q = std::numeric_limits<double>::quiet_NaN();
        if (r.witness) {
          cert = r.witness->certificate;
          q = r.witness->q;
        }
        ctx.add("finite obstruction", r.found ? "found" : "none", r.found ? Outcome::violated : Outcome::pass, q, cert);
      }
    } else if (corpus_list->parsed()) {
      rep.command = "corpus list";
      rep.result["ids"] = corpus_ids();
    } else if (corpus_run_cmd->parsed()) {
      rep.command = "corpus run " + corpus_id;
      Json items = Json::array();
      for (const auto& item : corpus_run(corpus_id, tol)) {
        items.push_back({{"id", item.id}, {"provenance", item.provenance}, {"status", to_string(item.status())},
                         {"runtime_ms", item.runtime_ms}});
        for (const auto& chk : item.checks) {
          const Outcome o = chk.inconclusive ? Outcome::inconclusive : chk.passed ? Outcome::pass : Outcome::violated;
          ctx.add(item.id + ": " + chk.name, to_string(o), o, chk.value, chk.certificate);
        }
      }
      rep.result["items"] = items;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return {kExitInputError, std::nullopt};
  }
  rep.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();

  if (format == "json") out << report_json(rep).dump(2) << "\n";
  else cli_detail::print_text(out, rep);
  if (!out_path.empty()) {
    std::ofstream file(out_path);
    if (!file) {
      err << "error: cannot write '" << out_path << "'\n";
      return {kExitInputError, std::nullopt};
    }
    file << report_json(rep, true).dump(2) << "\n";
  }
  return {rep.exit_code(), rep};
}

}  // namespace domcheck
