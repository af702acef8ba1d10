#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "domcheck/cli.hpp"
#include "domcheck/random.hpp"

using namespace domcheck;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

namespace fs = std::filesystem;

struct Scratch {
  fs::path dir;

  Scratch() {
    dir = fs::temp_directory_path() / ("domcheck_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) const {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string write(const std::string& name, const DocumentEnvelope& d) const { return write(name, serialize(d)); }
};

struct Run {
  int code;
  std::string out, err;
  std::optional<Report> report;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  auto r = run_command(std::move(args), out, err);
  return {r.exit_code, out.str(), err.str(), std::move(r.report)};
}

ErrorCode parse_code(const std::string& text) {
  try {
    parse_document(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("document was accepted: " << text);
  return ErrorCode::BadConfig;
}

std::string parse_message(const std::string& text) {
  try {
    parse_document(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

void require_same(const DocumentEnvelope& a, const DocumentEnvelope& b) {
  REQUIRE(a.kind == b.kind);
  CHECK(a.meta == b.meta);
  CHECK(a.matrix == b.matrix);
  CHECK(a.spectrum == b.spectrum);
  CHECK(a.map.form == b.map.form);
  CHECK(a.map.dim_in == b.map.dim_in);
  CHECK(a.map.dim_out == b.map.dim_out);
  CHECK(a.map.choi == b.map.choi);
  CHECK(a.map.builtin == b.map.builtin);
  REQUIRE(a.map.kraus.size() == b.map.kraus.size());
  for (std::size_t k = 0; k < a.map.kraus.size(); ++k) CHECK(a.map.kraus[k] == b.map.kraus[k]);
  REQUIRE(a.map.params.size() == b.map.params.size());
  for (const auto& [key, m] : a.map.params) CHECK(b.map.params.at(key) == m);
}

}  // namespace

TEST_CASE("parse_document accepts each kind", "[cli]") {
  const auto one = parse_document(R"({"kind":"matrix","rows":1,"cols":1,"data":[[1,0]]})");
  CHECK(one.kind == DocumentKind::matrix);
  CHECK(one.matrix == ComplexMatrix::Identity(1, 1));

  const auto t = parse_document(R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{"builtin":"transpose"}})");
  CHECK(t.kind == DocumentKind::map);
  CHECK(max_unit_discrepancy(t.to_map(), SuperOperator::transpose(2)) == 0.0);

  const auto s = parse_document(R"({"kind":"symbol","n":2,"data":[[1,0],[0.5,0],[0.5,0],[1,0]],"meta":{"src":"x"}})");
  CHECK(s.kind == DocumentKind::symbol);
  CHECK(s.matrix(0, 1) == Complex(0.5, 0));
  CHECK(s.meta.at("src") == "x");

  const auto mu = parse_document(R"({"kind":"spectrum","values":[3,1,0.5]})");
  CHECK(mu.spectrum.size() == 3);

  const auto conj = parse_document(
      R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{"builtin":"conjugation","params":{"u":{"rows":2,"cols":2,"data":[[0,0],[1,0],[-1,0],[0,0]]}}}})");
  const auto u = conj.map.params.at("u");
  CHECK(max_unit_discrepancy(conj.to_map(), SuperOperator::conjugation(u)) == 0.0);

  const auto kraus = parse_document(
      R"({"kind":"map","dim_in":2,"dim_out":1,"repr":{"kraus":[{"rows":1,"cols":2,"data":[[1,0],[0,0]]},{"rows":1,"cols":2,"data":[[0,0],[1,0]]}]}})");
  CHECK(kraus.to_map().apply(ComplexMatrix::Identity(2, 2))(0, 0) == Complex(2, 0));
}

TEST_CASE("parse_document rejects malformed input", "[cli]") {
  CHECK(parse_code(R"({"kind":"matrix","rows":2,"cols":2,"data":[[1,0]]})") == ErrorCode::SchemaError);
  CHECK_THAT(parse_message(R"({"kind":"matrix","rows":2,"cols":2,"data":[[1,0]]})"), ContainsSubstring("'data'"));
  CHECK_THAT(parse_message(R"({"rows":1,"cols":1,"data":[[1,0]]})"), ContainsSubstring("'kind'"));
  CHECK_THAT(parse_message(R"({"kind":"tensor"})"), ContainsSubstring("'kind'"));
  CHECK_THAT(parse_message(R"({"kind":"matrix","rows":0,"cols":1,"data":[]})"), ContainsSubstring("'rows'"));
  CHECK_THAT(parse_message(R"({"kind":"matrix","rows":1,"cols":1,"data":[1]})"), ContainsSubstring("'data[0]'"));
  CHECK_THAT(parse_message(R"({"kind":"matrix","rows":1,"cols":1,"data":[[1,0,0]]})"), ContainsSubstring("'data[0]'"));
  CHECK_THAT(parse_message(R"({"kind":"spectrum","values":[1,-1]})"), ContainsSubstring("'values[1]'"));
  CHECK_THAT(parse_message(R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{"builtin":"frobnicate"}})"),
             ContainsSubstring("'repr.builtin'"));
  CHECK_THAT(parse_message(R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{"builtin":"conjugation"}})"),
             ContainsSubstring("'repr.params.u'"));
  CHECK_THAT(parse_message(R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{}})"), ContainsSubstring("'repr'"));
  CHECK_THAT(parse_message(
                 R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{"choi":{"rows":1,"cols":1,"data":[[1,0]]}}})"),
             ContainsSubstring("'repr.choi.rows'"));
  CHECK_THAT(parse_message(
                 R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{"kraus":[{"rows":1,"cols":1,"data":[[1,0]]}]}})"),
             ContainsSubstring("'repr.kraus[0].rows'"));
  CHECK_THAT(parse_message(R"({"kind":"matrix","rows":1,"cols":1,"data":[[1,0]],"meta":{"a":1}})"),
             ContainsSubstring("'meta.a'"));

  // builtin shape conflicts surface when the map is built
  const auto stormer = parse_document(R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{"builtin":"stormer_U"}})");
  CHECK_THROWS_AS(stormer.to_map(), Error);

  CHECK(parse_code("{\"kind\":\"matrix\",\n\"rows\":1 \"cols\":1}") == ErrorCode::ParseError);
  CHECK_THAT(parse_message("{\"kind\":\"matrix\",\n\"rows\":1 \"cols\":1}"), ContainsSubstring("line 2"));
  CHECK(parse_code("") == ErrorCode::ParseError);
}

TEST_CASE("serialize round trip is entry exact", "[cli]") {
  Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<Eigen::Index>(uniform_int(rng, 1, 4));
    std::vector<DocumentEnvelope> docs;
    docs.push_back(matrix_document(random_gaussian(rng, n, uniform_int(rng, 1, 4)) * std::pow(10.0, uniform(rng, -8, 8))));
    docs.push_back(symbol_document(random_hermitian(rng, n)));
    DocumentEnvelope spec;
    spec.kind = DocumentKind::spectrum;
    spec.spectrum = random_gaussian(rng, n, 1).col(0).cwiseAbs();
    spec.meta["note"] = "trial " + std::to_string(trial);
    docs.push_back(spec);
    docs.push_back(choi_document(SuperOperator::from_choi(random_hermitian(rng, n * 2), n, 2)));
    DocumentEnvelope kraus;
    kraus.kind = DocumentKind::map;
    kraus.map.form = MapRepr::Form::kraus;
    kraus.map.dim_in = n;
    kraus.map.dim_out = 3;
    for (int k = 0; k < 2; ++k) kraus.map.kraus.push_back(random_gaussian(rng, 3, n));
    docs.push_back(kraus);
    DocumentEnvelope builtin;
    builtin.kind = DocumentKind::map;
    builtin.map.form = MapRepr::Form::builtin;
    builtin.map.dim_in = builtin.map.dim_out = n;
    builtin.map.builtin = "schur";
    builtin.map.params["symbol"] = random_hermitian(rng, n);
    docs.push_back(builtin);

    for (const auto& d : docs) {
      const std::string text = serialize(d);
      const auto back = parse_document(text);
      require_same(d, back);
      CHECK(serialize(back) == text);
    }
  }
}

TEST_CASE("run_command examples", "[cli]") {
  Scratch s;
  const auto m = s.write("m.json", matrix_document(diag({3.0, -4.0, 0.0})));
  auto r = run({"sv", "--in", m, "--format", "json"});
  CHECK(r.code == 0);
  REQUIRE(r.report);
  CHECK(r.report->result["spectrum"] == Json::array({4.0, 3.0, 0.0}));
  const Json parsed = Json::parse(r.out);
  CHECK(parsed["command"] == "sv");
  CHECK(parsed["inputs"]["in"].get<std::string>().rfind("sha256:", 0) == 0);

  const auto t2 = s.write("t2.json", R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{"builtin":"transpose"}})");
  r = run({"check-map", "--property", "kpositive:2", "--in", t2});
  CHECK(r.code == 1);
  REQUIRE(r.report);
  CHECK_THAT(r.report->verdicts.at(0).value, WithinAbs(-1.0, 1e-9));

  // the no-go (a) pair: S(a) = tr(a) 1 given by its Choi matrix, T the transpose
  const auto sdoc = s.write("S.json", choi_document(SuperOperator::trace_times_identity(2)));
  const auto tdoc = s.write("T.json", choi_document(SuperOperator::transpose(2)));
  r = run({"dominates", "--s", sdoc, "--t", tdoc, "--order", "complete", "--format", "json"});
  CHECK(r.code == 0);
  REQUIRE(r.report);
  CHECK(r.report->verdicts.back().verdict == "dominated");
  r = run({"dominates", "--s", tdoc, "--t", sdoc, "--order", "positive"});
  CHECK(r.code == 1);
}

TEST_CASE("run_command subcommands", "[cli]") {
  Scratch s;
  Rng rng(9);
  const ComplexMatrix a = random_psd(rng, 4, 4);
  const ComplexMatrix root = spectral_power(a, 0.5);
  const ComplexMatrix inside = root * random_psd(rng, 4, 2) * root / (operator_norm(random_psd(rng, 4, 2)) + 10.0);
  const auto pa = s.write("a.json", matrix_document(a));
  const auto px = s.write("x.json", matrix_document(hermitian_part(inside)));
  const auto p2a = s.write("2a.json", matrix_document(2.0 * a));

  CHECK(run({"interval-member", "--a", pa, "--x", px}).code == 0);
  CHECK(run({"interval-member", "--a", px, "--x", p2a}).code == 1);
  auto r = run({"interval-param", "--a", pa, "--x", px});
  CHECK(r.code == 0);
  REQUIRE(r.report);
  CHECK(r.report->result.contains("w"));
  CHECK(run({"interval-param", "--a", pa, "--x", p2a}).code == 1);
  CHECK(run({"psol-member", "--gen", px, "--gen", pa, "--x", px}).code == 0);

  const auto mu_x = s.write("mx.json", R"({"kind":"spectrum","values":[3,3]})");
  const auto mu_y = s.write("my.json", R"({"kind":"spectrum","values":[1,1]})");
  CHECK(run({"submajorize", "--x", mu_x, "--y", mu_y}).code == 0);
  CHECK(run({"submajorize", "--x", mu_y, "--y", mu_x}).code == 1);
  r = run({"transfer", "--x", mu_x, "--y", mu_y});
  CHECK(r.code == 0);
  REQUIRE(r.report);
  CHECK(r.report->verdicts.size() == 2);

  const auto g = s.write("g.json", matrix_document(random_gaussian(rng, 4, 4)));
  CHECK(run({"norm", "--in", g, "--gauge", "kyfan:2"}).code == 0);
  CHECK(run({"norm", "--in", g, "--gauge", "bogus"}).code == 3);
  CHECK(run({"pinch", "--in", g, "--block", "2"}).code == 0);
  CHECK(run({"pinch", "--in", g, "--blocks", "0,3;1,2"}).code == 0);
  CHECK(run({"pinch", "--in", g, "--blocks", "0,3;1"}).code == 3);
  CHECK(run({"pinch", "--in", g, "--block", "0"}).code == 3);

  const auto big = s.write("big.json", matrix_document(diag({3.0, 2.0, 1.5, 0.1})));
  r = run({"chain", "--x", big, "--n", "3"});
  CHECK(r.code == 0);
  CHECK(run({"chain", "--x", big, "--n", "4"}).code == 3);

  const auto id4 = s.write("id4.json", R"({"kind":"map","dim_in":4,"dim_out":4,"repr":{"builtin":"identity"}})");
  r = run({"offdiag-verify", "--map", id4, "--x", pa, "--cut", "2", "--gauge", "trace"});
  CHECK(r.code == 0);
  CHECK(run({"offdiag-verify", "--map", id4, "--x", pa, "--cut", "9"}).code == 3);

  ComplexMatrix heavy_v = ComplexMatrix::Constant(8, 1, 0.9);
  heavy_v(0) = 1.0;
  const auto phi = s.write("phi.json", symbol_document(heavy_v * heavy_v.adjoint()));
  const auto psi = s.write("psi.json", symbol_document(ComplexMatrix::Identity(8, 8)));
  r = run({"schur", "--in", phi, "--tail", "3"});
  CHECK(r.code == 0);
  r = run({"schur", "--in", phi, "--psi", psi, "--c", "0.9", "--m", "3", "--out", (s.dir / "full.json").string()});
  CHECK(r.code == 1);
  REQUIRE(r.report);
  CHECK(r.report->verdicts.back().verdict == "found");

  // the full report carries the witness, and it re-verifies
  const Json full = Json::parse(cli_detail::read_file((s.dir / "full.json").string()));
  const Json& cert = full["verdicts"].back()["certificate"];
  CHECK(cert["kind"] == "psd-witness");
  CHECK(full["verdicts"].back()["certificate_digest"] == sha256_hex(cert.dump()));
}

TEST_CASE("run_command input errors exit 3", "[cli]") {
  Scratch s;
  const auto bad = s.write("bad.json", R"({"kind":"matrix","rows":2,"cols":2,"data":[[1,0]]})");
  auto r = run({"sv", "--in", bad});
  CHECK(r.code == 3);
  CHECK_THAT(r.err, ContainsSubstring("SchemaError"));
  CHECK_THAT(r.err, ContainsSubstring("'data'"));
  CHECK(run({"sv", "--in", (s.dir / "missing.json").string()}).code == 3);
  CHECK(run({"frobnicate"}).code == 3);
  CHECK(run({}).code == 3);
  CHECK(run({"sv"}).code == 3);
  CHECK(run({"corpus", "run", "no-such-item"}).code == 3);
  CHECK(run({"sv", "--in", bad, "--format", "xml"}).code == 3);
  CHECK(run({"corpus", "list", "--restarts", "0"}).code == 3);

  const auto t2 = s.write("t2.json", R"({"kind":"map","dim_in":2,"dim_out":2,"repr":{"builtin":"transpose"}})");
  CHECK(run({"check-map", "--property", "kpositive:3", "--in", t2}).code == 3);
  CHECK(run({"check-map", "--property", "nice", "--in", t2}).code == 3);
  const auto t3 = s.write("t3.json", R"({"kind":"map","dim_in":3,"dim_out":3,"repr":{"builtin":"transpose"}})");
  CHECK(run({"dominates", "--s", t2, "--t", t3}).code == 3);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("exit codes partition outcomes", "[cli]") {
  Report r;
  CHECK(r.exit_code() == 0);
  r.verdicts.push_back({"a", "pass", Outcome::pass});
  CHECK(r.exit_code() == 0);
  r.verdicts.push_back({"b", "inconclusive", Outcome::inconclusive});
  CHECK(r.exit_code() == 2);
  r.verdicts.push_back({"c", "violated", Outcome::violated});
  CHECK(r.exit_code() == 1);
}

TEST_CASE("tolerance flag and environment", "[cli]") {
  Scratch s;
  const auto m = s.write("m.json", matrix_document(diag({1.0})));
  ::setenv("DOMCHECK_TOL", "1e-5", 1);
  auto r = run({"sv", "--in", m});
  REQUIRE(r.report);
  CHECK(r.report->config.tol_cert == 1e-5);
  r = run({"sv", "--in", m, "--tol", "1e-3"});
  REQUIRE(r.report);
  CHECK(r.report->config.tol_cert == 1e-3);
  ::setenv("DOMCHECK_TOL", "lots", 1);
  CHECK(run({"sv", "--in", m}).code == 3);
  ::unsetenv("DOMCHECK_TOL");
  r = run({"--seed", "5", "sv", "--in", m});
  REQUIRE(r.report);
  CHECK(r.report->config.seed == 5);
  CHECK(r.report->config.tol_cert == 1e-7);
}

TEST_CASE("reports are deterministic modulo timing", "[cli]") {
  Scratch s;
  const auto t = s.write("t.json", choi_document(SuperOperator::stormer_U() + SuperOperator::stormer_V()));
  auto a = run({"check-map", "--property", "positive", "--in", t, "--format", "json", "--seed", "3"});
  auto b = run({"check-map", "--property", "positive", "--in", t, "--format", "json", "--seed", "3"});
  CHECK(a.code == 0);
  CHECK(strip_timing(Json::parse(a.out)).dump() == strip_timing(Json::parse(b.out)).dump());
  CHECK_FALSE(strip_timing(Json::parse(a.out)).contains("runtime_ms"));

  a = run({"corpus", "run", "nogo-a", "--format", "json"});
  b = run({"corpus", "run", "nogo-a", "--format", "json"});
  CHECK(a.code == 0);
  CHECK(strip_timing(Json::parse(a.out)).dump() == strip_timing(Json::parse(b.out)).dump());
}
