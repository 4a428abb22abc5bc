// noisepad command line: analysis, surfaces, sessions and attack demos.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <noisepad/noisepad.hpp>

namespace {

using namespace noisepad;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("noisepad");
  logger->set_pattern("noisepad: [%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("NOISEPAD_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

int auto_resolution(int exp) { return std::max(16, encode::minimum_resolution_bits(std::ldexp(1.0, exp))); }

std::string num(double v) { return analysis::format_number(v); }

json ledger_json(const LeakLedger& l) {
  return {{"statistical_leak", l.statistical_leak},
          {"disclosed_parity_bits", l.disclosed_parity_bits},
          {"discarded_bits", l.discarded_bits},
          {"total", l.total()}};
}

json tag_json(const std::optional<Tag>& t) { return t ? json(to_hex(*t)) : json(nullptr); }

Bits read_k0_file(const std::string& path, std::size_t bits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::validation, "cannot read K0 file " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() * 8 < bits) {
    throw Error(ErrorCode::validation, "K0 file holds " + std::to_string(bytes.size() * 8) + " bits, need " +
                                           std::to_string(bits));
  }
  return unpack_bits(bytes, bits);
}

struct SessionFlags {
  double n_avg = 1e4;
  int exp = -30;
  std::optional<int> resolution;
  std::size_t k0_bits = 1024;
  std::uint32_t cycles = 1;
  std::uint64_t seed = 1;
  std::size_t safety = kDefaultSafetyBits;
  std::size_t reconcile_block = kDefaultReconciliationBlock;
  std::string reconcile = "parity";
  bool no_confirm = false;
  std::string transcript_out;

  void add_physical(CLI::App* cmd) {
    cmd->add_option("--n-avg", n_avg, "mean photon number <n>")->capture_default_str();
    cmd->add_option("--delta-phi-exp", exp, "basis offset as a power of two, delta_phi = 2^exp")->capture_default_str();
    cmd->add_option("--resolution-bits", resolution, "phase grid resolution (default: automatic)");
  }

  void add_local(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "seed for the simulated physical generator")->capture_default_str();
    cmd->add_option("--reconcile-block", reconcile_block, "bits per parity block")->capture_default_str();
    cmd->add_option("--reconcile", reconcile, "parity | none")
        ->check(CLI::IsMember({"parity", "none"}))
        ->capture_default_str();
    cmd->add_option("--transcript-out", transcript_out, "record public frames to this file");
  }

  void add_session(CLI::App* cmd) {
    add_physical(cmd);
    add_local(cmd);
    cmd->add_option("--k0-bits", k0_bits, "length of the seed key K0")->capture_default_str();
    cmd->add_option("--cycles", cycles, "distribution cycles to run")->capture_default_str();
    cmd->add_option("--safety-bits", safety, "bits discarded per amplification beyond the leak")->capture_default_str();
    cmd->add_flag("--no-confirm", no_confirm, "skip the final CONFIRM tag exchange");
  }

  SessionParams params() const {
    SessionParams p;
    p.avg_photon_number = n_avg;
    p.delta_phi = std::ldexp(1.0, exp);
    p.resolution_bits = resolution.value_or(auto_resolution(exp));
    p.block_length = k0_bits;
    p.safety_bits = safety;
    p.reconciliation_block = std::min(reconcile_block, k0_bits);
    p.reconcile = reconcile == "none" ? ReconcileMode::none : ReconcileMode::parity_bisection;
    return p;
  }

  SessionOptions options(bool progress) const {
    SessionOptions o;
    o.cycles = cycles;
    o.confirm = !no_confirm;
    if (progress) {
      o.on_cycle = [](const CycleProgress& c) {
        std::cerr << json{{"cycle", c.cycle_index},
                          {"delivered_a_to_b", c.delivered_a_to_b},
                          {"delivered_b_to_a", c.delivered_b_to_a},
                          {"total_delivered", c.total_delivered},
                          {"ledger", ledger_json(c.ledger)}}
                         .dump()
                  << "\n";
      };
    }
    return o;
  }
};

json params_json(const SessionParams& p) {
  return {{"n_avg", p.avg_photon_number},
          {"delta_phi_exp", transport::delta_phi_exponent(p.delta_phi)},
          {"resolution_bits", p.resolution_bits},
          {"k0_bits", p.block_length},
          {"safety_bits", p.safety_bits},
          {"reconcile", p.reconcile == ReconcileMode::none ? "none" : "parity"},
          {"reconciliation_block", p.reconciliation_block}};
}

json summary_json(const SessionSummary& s) {
  return {{"role", s.role == Role::initiator ? "initiator" : "responder"},
          {"cycles_completed", s.cycles_completed},
          {"delivered_per_cycle", s.delivered_per_cycle},
          {"total_delivered_bits", s.total_delivered},
          {"boost_factor", s.boost()},
          {"ledger", ledger_json(s.ledger)},
          {"stopped_early", !s.stop_reason.empty()},
          {"stop_reason", s.stop_reason},
          {"confirm_tag", tag_json(s.confirm_tag)},
          {"confirm_match", s.confirm_match ? json(*s.confirm_match) : json(nullptr)}};
}

json keys_json(const KeyChain& chain) {
  json keys = json::array();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    keys.push_back({{"index", i}, {"bits", chain[i].bits.size()}, {"hex", bits_to_hex(chain[i].bits)}});
  }
  return {{"keys", keys}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
}

std::unique_ptr<std::ofstream> open_transcript(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*f) throw Error(ErrorCode::io, "cannot open transcript file " + path);
  return f;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------------------

int cmd_analyze(double n_avg, int exp, double ratio, std::size_t k0_bits, std::size_t safety, bool as_json) {
  const phys::CoherentStateParams params(n_avg);
  const double dphi = std::ldexp(1.0, exp);
  const auto report = analysis::validate_params(params, dphi, ratio);
  const auto point = analysis::security_point(params, dphi);
  const double boost = analysis::boost_factor(params, dphi, k0_bits, safety);
  const double legit = phys::legitimate_error(params);

  if (as_json) {
    json violations = json::array();
    for (const auto& v : report.violations) {
      violations.push_back({{"inequality", v.inequality}, {"required", v.required_ratio}, {"actual", v.actual_ratio}});
    }
    print({{"n_avg", n_avg},
           {"delta_phi_exp", exp},
           {"delta_phi", dphi},
           {"sigma_phi", report.sigma_phi},
           {"valid", report.ok()},
           {"violations", violations},
           {"eve_error", point.p_error},
           {"delta_h", point.delta_h},
           {"leak_length", point.leak_length},
           {"leak_per_symbol", analysis::entropy_leak_excess(params, dphi)},
           {"boost_factor", boost},
           {"legitimate_error", legit}});
  } else {
    std::cout << "n_avg            " << num(n_avg) << "\n"
              << "delta_phi        2^" << exp << " = " << num(dphi) << "\n"
              << "sigma_phi        " << num(report.sigma_phi) << "\n"
              << "window           " << report.describe() << "\n"
              << "Pe (Eve, r=2)    " << num(point.p_error) << "\n"
              << "delta_H          " << num(point.delta_h) << "\n"
              << "L                " << num(point.leak_length) << "\n"
              << "leak per symbol  " << num(analysis::entropy_leak_excess(params, dphi)) << "\n"
              << std::left << std::setw(17) << ("boost (K0=" + std::to_string(k0_bits) + ")") << num(boost) << "\n"
              << "Bob error        " << num(legit) << "\n";
  }
  if (!report.ok()) {
    spdlog::error("{}", report.describe());
    return kExitValidation;
  }
  return kExitOk;
}

std::vector<double> parse_grid(const std::string& text, const char* name) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      if (item == "-inf") {
        out.push_back(-std::numeric_limits<double>::infinity());
        continue;
      }
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::validation, std::string(name) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::validation, std::string(name) + " must not be empty");
  return out;
}

int cmd_surface(const std::string& quantity, const std::string& n_grid, const std::string& exp_grid,
                const std::string& out_path, bool as_json) {
  const auto ns = parse_grid(n_grid, "--n-grid");
  const auto es = parse_grid(exp_grid, "--exp-grid");
  const auto q = quantity == "leak_length" ? analysis::SurfaceQuantity::leak_length : analysis::SurfaceQuantity::delta_h;
  const std::string csv = analysis::emit_surface(ns, es, q);
  const std::size_t rows = ns.size() * es.size();
  if (out_path.empty() || out_path == "-") {
    std::cout << csv;
    return kExitOk;
  }
  write_text(out_path, csv);
  if (as_json) {
    print({{"quantity", quantity}, {"rows", rows}, {"out", out_path}});
  } else {
    std::cout << rows << " rows written to " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const SessionFlags& f, bool progress, const std::string& keys_out) {
  SimulationConfig cfg;
  cfg.params = f.params();
  cfg.seed_key = bits_from_seed(f.seed, f.k0_bits);
  cfg.seed = f.seed;
  cfg.options = f.options(progress);
  auto tape = open_transcript(f.transcript_out);
  cfg.transcript = tape.get();
  spdlog::info("simulating {} cycles, K0 = {} bits", f.cycles, f.k0_bits);
  const auto r = simulate_session(cfg);
  if (r.tap_failed) spdlog::warn("transcript file could not be written completely");

  json out = {{"seed", f.seed}, {"params", params_json(cfg.params)}, {"cycles_requested", f.cycles}};
  out.update(summary_json(r.initiator));
  out.erase("role");
  out["agreement"] = r.agreement;
  out["responder_confirm_tag"] = tag_json(r.responder.confirm_tag);
  if (!f.transcript_out.empty()) out["transcript"] = f.transcript_out;
  print(out);
  if (!keys_out.empty()) write_text(keys_out, keys_json(r.chain_a).dump(2) + "\n");
  if (!r.agreement) {
    spdlog::error("key chains diverged");
    return kExitRuntime;
  }
  return kExitOk;
}

struct KeySource {
  std::string file;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* cmd) {
    auto* a = cmd->add_option("--k0-file", file, "raw K0 bytes (bits taken LSB first)")->check(CLI::ExistingFile);
    auto* b = cmd->add_option("--k0-seed", seed, "derive K0 from a seed (INSECURE, testing only)");
    a->excludes(b);
  }

  Bits get(std::size_t bits) const {
    if (!file.empty()) return read_k0_file(file, bits);
    if (!seed) throw Error(ErrorCode::validation, "one of --k0-file or --k0-seed is required");
    spdlog::warn("K0 derived from --k0-seed; this is for testing only and offers no secrecy");
    return bits_from_seed(*seed, bits);
  }
};

int session_exit(const SessionSummary& s) {
  if (s.confirm_match && !*s.confirm_match) {
    spdlog::error("CONFIRM mismatch: the peers do not hold the same keys");
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_serve(const SessionFlags& f, const KeySource& k0, const std::string& listen, const std::string& port_file,
              int max_sessions) {
  if (k0.file.empty() && !k0.seed) throw Error(ErrorCode::validation, "one of --k0-file or --k0-seed is required");
  transport::TcpListener listener(transport::parse_endpoint(listen));
  spdlog::info("listening on port {}", listener.port());
  if (!port_file.empty()) write_text(port_file, std::to_string(listener.port()) + "\n");
  SessionParams policy = f.params();
  int status = kExitOk;
  for (int i = 0; i < max_sessions; ++i) {
    auto channel = listener.accept();
    auto tape = open_transcript(f.transcript_out);
    std::optional<transport::TapChannel> tap;
    transport::Channel* ch = channel.get();
    if (tape) ch = &tap.emplace(*channel, *tape);
    try {
      const auto out = run_responder(*ch, [&](std::size_t bits) { return k0.get(bits); }, f.seed, policy);
      json j = {{"session", i}, {"params", params_json(out.party->params())}};
      j.update(summary_json(out.summary));
      print(j);
      status = std::max(status, session_exit(out.summary));
    } catch (const Error& e) {
      spdlog::error("session {} failed: {}", i, e.what());
      status = kExitRuntime;
    }
  }
  return status;
}

int cmd_connect(const SessionFlags& f, const KeySource& k0, const std::string& addr, bool progress) {
  const SessionParams params = f.params();
  Party party(Role::initiator, params, k0.get(params.block_length), f.seed);
  auto channel = transport::connect_tcp(transport::parse_endpoint(addr));
  auto tape = open_transcript(f.transcript_out);
  std::optional<transport::TapChannel> tap;
  transport::Channel* ch = channel.get();
  if (tape) ch = &tap.emplace(*channel, *tape);
  const auto s = run_initiator(party, *ch, f.options(progress));
  json j = {{"params", params_json(params)}};
  j.update(summary_json(s));
  print(j);
  return session_exit(s);
}

// ---------------------------------------------------------------------------

int cmd_attack_kpa(const SessionFlags& f) {
  SimulationConfig cfg;
  cfg.params = f.params();
  cfg.seed_key = bits_from_seed(f.seed, f.k0_bits);
  cfg.seed = f.seed;
  cfg.options = f.options(false);
  std::ostringstream tape;
  cfg.transcript = &tape;
  const auto session = simulate_session(cfg);
  const Bits& k1 = session.chain_a[1].bits;

  // A later encrypts a known message X with K1, noiselessly.
  const Bits x = SeededStream(derive_seed(f.seed, 0x58)).bits(k1.size());
  const Bits y = xor_bits(x, k1);
  attacker::AttackReport report;
  const Bits recovered = attacker::known_plaintext_attack(y, x);
  report.recovered_keys.emplace_back(1, recovered);

  std::istringstream in(tape.str());
  const auto blocks = transport::read_transcript(in, cfg.params.resolution_bits);
  for (const auto& b : blocks) report.symbols_observed += b.transcript.symbols.size();
  const auto chain = attacker::chain_compromise(blocks, 1, recovered, cfg.params.constellation());
  bool all = recovered == k1;
  for (const auto& k : chain.keys) {
    report.recovered_keys.emplace_back(k.index, k.key);
    all = all && k.index < session.chain_a.size() && k.key == session.chain_a[k.index].bits;
  }
  report.gaps = chain.gaps;
  report.recovered = all;
  print(attacker::to_json(report));
  return kExitOk;
}

json read_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::validation, "cannot read reference keys " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, std::string("reference keys: ") + e.what());
  }
}

int cmd_attack_chain(const std::string& transcript, int exp, std::optional<int> resolution, std::size_t known_index,
                     const std::string& known_hex, std::optional<std::size_t> known_bits,
                     const std::string& reference) {
  std::ifstream in(transcript, std::ios::binary);
  if (!in) throw Error(ErrorCode::validation, "cannot read transcript " + transcript);
  const int r = resolution.value_or(auto_resolution(exp));
  const auto blocks = transport::read_transcript(in, r);
  const encode::Constellation c(std::ldexp(1.0, exp), r);

  std::size_t bits = known_bits.value_or(0);
  if (!known_bits) {
    for (const auto& b : blocks) {
      if (b.transcript.key_index() == known_index + 1) bits = b.transcript.symbols.size();
    }
  }
  const auto bytes = from_hex(known_hex);
  if (bits == 0 || bits > bytes.size() * 8) {
    throw Error(ErrorCode::validation, "cannot determine the known key length; pass --known-key-bits");
  }
  const Bits known = unpack_bits(bytes, bits);
  const auto chain = attacker::chain_compromise(blocks, known_index, known, c);

  attacker::AttackReport report;
  for (const auto& b : blocks) report.symbols_observed += b.transcript.symbols.size();
  for (const auto& k : chain.keys) report.recovered_keys.emplace_back(k.index, k.key);
  report.gaps = chain.gaps;
  if (!reference.empty()) {
    const json ref = read_reference(reference);
    bool all = !chain.keys.empty();
    for (const auto& k : chain.keys) {
      bool match = false;
      for (const auto& e : ref.at("keys")) {
        if (e.at("index").get<std::size_t>() == k.index) {
          match = e.at("hex").get<std::string>() == bits_to_hex(k.key) && e.at("bits").get<std::size_t>() == k.key.size();
        }
      }
      all = all && match;
    }
    report.recovered = all;
  }
  print(attacker::to_json(report));
  return kExitOk;
}

int cmd_attack_basis(double n_avg, int exp, std::optional<int> resolution, std::size_t key_bits, std::uint64_t seed) {
  attacker::BasisAttackConfig cfg;
  cfg.avg_photon_number = n_avg;
  cfg.delta_phi = std::ldexp(1.0, exp);
  cfg.resolution_bits = resolution.value_or(auto_resolution(exp));
  cfg.key_bits = key_bits;
  cfg.seed = seed;
  const auto report = attacker::run_basis_attack(cfg);
  json j = attacker::to_json(report);
  j["n_avg"] = n_avg;
  j["delta_phi_exp"] = exp;
  j["key_bits"] = key_bits;
  print(j);
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::validation:
    case ErrorCode::domain: return kExitValidation;
    default: return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"noisepad: noise-protected key distribution toolkit"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable output everywhere");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "security figures for one operating point");
  double a_n = 0;
  int a_exp = 0;
  double a_ratio = analysis::kDefaultRatio;
  std::size_t a_k0 = 256, a_safety = kDefaultSafetyBits;
  analyze->add_option("--n-avg", a_n, "mean photon number <n>")->required();
  analyze->add_option("--delta-phi-exp", a_exp, "delta_phi = 2^exp")->required();
  analyze->add_option("--ratio", a_ratio, "factor read into '>>'")->capture_default_str();
  analyze->add_option("--k0-bits", a_k0, "seed key length for the boost estimate")->capture_default_str();
  analyze->add_option("--safety-bits", a_safety, "safety margin for the boost estimate")->capture_default_str();

  // surface
  auto* surface = app.add_subcommand("surface", "CSV grid of delta_H or L");
  std::string s_quantity = "delta_h", s_n, s_exp, s_out;
  surface->add_option("--quantity", s_quantity)->check(CLI::IsMember({"delta_h", "leak_length"}))->capture_default_str();
  surface->add_option("--n-grid", s_n, "comma separated <n> values")->required();
  surface->add_option("--exp-grid", s_exp, "comma separated exponents, -inf for delta_phi = 0")->required();
  surface->add_option("--out", s_out, "output file (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run A and B in-process over loopback");
  SessionFlags sim;
  bool sim_progress = false;
  std::string sim_keys;
  sim.add_session(simulate);
  simulate->add_flag("--progress", sim_progress, "JSON-lines progress per cycle on stderr");
  simulate->add_option("--keys-out", sim_keys, "write the key chain as JSON (exposes secrets)");

  // serve
  auto* serve = app.add_subcommand("serve", "responder over TCP");
  SessionFlags srv;
  KeySource srv_k0;
  std::string srv_listen = "127.0.0.1:0", srv_port_file;
  int srv_max = 1;
  srv.add_local(serve);
  srv_k0.add(serve);
  serve->add_option("--listen", srv_listen, "host:port")->capture_default_str();
  serve->add_option("--port-file", srv_port_file, "write the bound port here");
  serve->add_option("--max-sessions", srv_max, "sessions to serve before exiting")->capture_default_str();

  // connect
  auto* connect = app.add_subcommand("connect", "initiator over TCP");
  SessionFlags con;
  KeySource con_k0;
  std::string con_addr;
  bool con_progress = false;
  con.add_session(connect);
  con_k0.add(connect);
  connect->add_option("--addr", con_addr, "host:port of the responder")->required();
  connect->add_flag("--progress", con_progress, "JSON-lines progress per cycle on stderr");

  // attacks
  auto* kpa = app.add_subcommand("attack-kpa", "known-plaintext attack on a simulated session");
  SessionFlags kpa_flags;
  kpa_flags.add_session(kpa);

  auto* chain = app.add_subcommand("attack-chain", "walk the key chain from one revealed key");
  std::string ch_transcript, ch_hex, ch_reference;
  int ch_exp = -30;
  std::optional<int> ch_resolution;
  std::size_t ch_index = 1;
  std::optional<std::size_t> ch_bits;
  chain->add_option("--transcript", ch_transcript, "recorded transcript file")->required()->check(CLI::ExistingFile);
  chain->add_option("--delta-phi-exp", ch_exp, "session delta_phi = 2^exp")->capture_default_str();
  chain->add_option("--resolution-bits", ch_resolution, "session grid resolution (default: automatic)");
  chain->add_option("--known-index", ch_index, "index j of the revealed key K_j")->capture_default_str();
  chain->add_option("--known-key-hex", ch_hex, "revealed key, packed LSB first")->required();
  chain->add_option("--known-key-bits", ch_bits, "revealed key length (default: from the transcript)");
  chain->add_option("--reference-keys", ch_reference, "key chain JSON to check the recovery against")
      ->check(CLI::ExistingFile);

  auto* basis = app.add_subcommand("attack-basis", "Monte-Carlo ML basis discrimination");
  double b_n = 1e4;
  int b_exp = -6;
  std::optional<int> b_resolution;
  std::size_t b_bits = 100000;
  std::uint64_t b_seed = 1;
  basis->add_option("--n-avg", b_n)->capture_default_str();
  basis->add_option("--delta-phi-exp", b_exp)->capture_default_str();
  basis->add_option("--resolution-bits", b_resolution);
  basis->add_option("--key-bits", b_bits)->capture_default_str();
  basis->add_option("--seed", b_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*analyze) return cmd_analyze(a_n, a_exp, a_ratio, a_k0, a_safety, as_json);
    if (*surface) return cmd_surface(s_quantity, s_n, s_exp, s_out, as_json);
    if (*simulate) return cmd_simulate(sim, sim_progress, sim_keys);
    if (*serve) return cmd_serve(srv, srv_k0, srv_listen, srv_port_file, srv_max);
    if (*connect) return cmd_connect(con, con_k0, con_addr, con_progress);
    if (*kpa) return cmd_attack_kpa(kpa_flags);
    if (*chain) return cmd_attack_chain(ch_transcript, ch_exp, ch_resolution, ch_index, ch_hex, ch_bits, ch_reference);
    if (*basis) return cmd_attack_basis(b_n, b_exp, b_resolution, b_bits, b_seed);
  } catch (const transport::PeerError& e) {
    spdlog::error("peer rejected the session: {}", e.what());
    return kExitRuntime;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
