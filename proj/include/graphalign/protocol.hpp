// SPDX-License-Identifier: Apache-2.0
#ifndef GRAPHALIGN_PROTOCOL_HPP
#define GRAPHALIGN_PROTOCOL_HPP

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphalign/molfile.hpp"
#include "graphalign/sample.hpp"
#include "graphalign/synthetic.hpp"

namespace graphalign {

/// A violated predictor-protocol contract: bad exit status, missing
/// response records, malformed exchange files.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline int run_command(const std::string& command, const std::string& arg,
                       const std::filesystem::path& cwd) {
  const std::string full = command + " " + arg;
  pid_t pid = ::fork();
  if (pid < 0) throw ProtocolError("fork failed for predictor command");
  if (pid == 0) {
    if (::chdir(cwd.c_str()) != 0) ::_exit(127);
    ::execl("/bin/sh", "sh", "-c", full.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  int status = 0;
  if (::waitpid(pid, &status, 0) < 0)
    throw ProtocolError("waitpid failed for predictor command");
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ProtocolError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ProtocolError("cannot write " + p.string());
  out << content;
}

inline std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ProtocolError("cannot open " + p.string());
  std::vector<nlohmann::json> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ProtocolError(p.string() + ":" + std::to_string(lineno) + ": invalid JSON");
    records.push_back(std::move(j));
  }
  return records;
}

}  // namespace detail

/// Driver side of the file-exchange protocol. Each phase writes its
/// request file into the exchange directory, invokes the configured
/// command with the phase name as its argument (working directory = the
/// exchange directory), and reads the response files back. A non-zero
/// exit status aborts the iteration.
class ExternalPredictor : public Predictor {
 public:
  ExternalPredictor(std::string command, std::filesystem::path exchange_dir)
      : command_(std::move(command)), exchange_(std::move(exchange_dir)) {
    std::filesystem::create_directories(exchange_);
  }

  std::vector<std::optional<PlanarEmbedding>> predict(
      const std::vector<PredictRequest>& requests) override {
    std::string lines;
    for (const PredictRequest& r : requests) {
      nlohmann::json j{{"id", r.id}, {"input_ref", r.input_ref}};
      lines += j.dump();
      lines += '\n';
    }
    detail::write_file(exchange_ / "predict_request.jsonl", lines);
    for (const PredictRequest& r : requests)
      std::filesystem::remove(exchange_ / (r.id + ".mol"));
    invoke("predict");

    std::vector<std::optional<PlanarEmbedding>> out;
    out.reserve(requests.size());
    for (const PredictRequest& r : requests) {
      std::filesystem::path p = exchange_ / (r.id + ".mol");
      if (!std::filesystem::exists(p)) {
        out.push_back(std::nullopt);
        continue;
      }
      auto parsed = parse_molfile(detail::read_file(p));
      out.push_back(parsed.ok() ? std::optional<PlanarEmbedding>(std::move(*parsed.value))
                                : std::nullopt);
    }
    return out;
  }

  std::vector<double> score(const std::vector<ScoreRequest>& requests) override {
    std::string lines;
    for (const ScoreRequest& r : requests) {
      std::string rel = "candidates/" + r.id + ".mol";
      detail::write_file(exchange_ / rel, write_molfile(r.candidate, r.id));
      nlohmann::json j{{"id", r.id}, {"candidate", rel}};
      lines += j.dump();
      lines += '\n';
    }
    detail::write_file(exchange_ / "score_request.jsonl", lines);
    std::filesystem::remove(exchange_ / "scores.jsonl");
    invoke("score");

    std::map<std::string, double> scored;
    for (const nlohmann::json& j : detail::read_jsonl(exchange_ / "scores.jsonl"))
      scored[j.at("id").get<std::string>()] = j.at("log_likelihood").get<double>();
    std::vector<double> out;
    out.reserve(requests.size());
    for (const ScoreRequest& r : requests) {
      auto it = scored.find(r.id);
      if (it == scored.end())
        throw ProtocolError("predictor returned no score for request " + r.id);
      out.push_back(it->second);
    }
    return out;
  }

  void retrain(const std::vector<WeightedSample>& source_rich,
               const std::vector<WeightedSample>& target_rich) override {
    std::string lines;
    auto emit = [&](const WeightedSample& w) {
      if (!w.sample.rich_label)
        throw std::invalid_argument("retrain sample " + w.sample.id + " has no rich label");
      std::string rel = "train/" + w.sample.id + ".mol";
      detail::write_file(exchange_ / rel, write_molfile(*w.sample.rich_label, w.sample.id));
      nlohmann::json j{{"id", w.sample.id},
                       {"molfile", rel},
                       {"copies", w.copies},
                       {"input_ref", w.sample.input_ref}};
      lines += j.dump();
      lines += '\n';
    };
    for (const WeightedSample& w : source_rich) emit(w);
    for (const WeightedSample& w : target_rich) emit(w);
    detail::write_file(exchange_ / "train_manifest.jsonl", lines);
    invoke("train");
  }

 private:
  void invoke(const std::string& phase) {
    int rc = detail::run_command(command_, phase, exchange_);
    if (rc != 0)
      throw ProtocolError("predictor command failed in phase '" + phase +
                          "' with exit status " + std::to_string(rc));
  }

  std::string command_;
  std::filesystem::path exchange_;
};

// ---------------------------------------------------------------------
// Reference protocol server backed by the synthetic predictor. State
// (exposure counts, unseen map, epoch) persists in a JSON file between
// invocations; hidden truths are read from each request's input_ref,
// which must be a molfile path.

inline nlohmann::json confusion_model_to_json(const ConfusionModel& m) {
  nlohmann::json j;
  j["epsilon0"] = m.epsilon0;
  j["tau"] = m.tau;
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& [label, c] : m.atom_exposure)
    atoms.push_back({{"token", label.token}, {"charge", label.charge}, {"exposure", c}});
  j["atom_exposure"] = std::move(atoms);
  nlohmann::json bonds = nlohmann::json::object();
  for (const auto& [order, c] : m.bond_exposure) bonds[to_string(order)] = c;
  j["bond_exposure"] = std::move(bonds);
  nlohmann::json unseen = nlohmann::json::array();
  for (const auto& [from, to] : m.unseen_map)
    unseen.push_back({{"from_token", from.token},
                      {"from_charge", from.charge},
                      {"to_token", to.token},
                      {"to_charge", to.charge}});
  j["unseen_map"] = std::move(unseen);
  return j;
}

inline ConfusionModel confusion_model_from_json(const nlohmann::json& j) {
  ConfusionModel m;
  m.epsilon0 = j.at("epsilon0").get<double>();
  m.tau = j.at("tau").get<double>();
  for (const nlohmann::json& a : j.at("atom_exposure"))
    m.atom_exposure[{a.at("token").get<std::string>(), a.at("charge").get<int>()}] =
        a.at("exposure").get<double>();
  for (auto it = j.at("bond_exposure").begin(); it != j.at("bond_exposure").end(); ++it) {
    auto order = bond_order_from_string(it.key());
    if (!order) throw ProtocolError("unknown bond order in model state: " + it.key());
    m.bond_exposure[*order] = it.value().get<double>();
  }
  for (const nlohmann::json& u : j.at("unseen_map"))
    m.unseen_map[{u.at("from_token").get<std::string>(), u.at("from_charge").get<int>()}] =
        {u.at("to_token").get<std::string>(), u.at("to_charge").get<int>()};
  m.rebuild_rows();
  return m;
}

/// Serves one protocol phase in the current working directory (the
/// exchange directory). Returns a process exit status.
inline int serve_simpred_phase(const std::filesystem::path& state_file,
                               const std::string& phase) {
  nlohmann::json state = nlohmann::json::parse(detail::read_file(state_file));
  ConfusionModel model = confusion_model_from_json(state.at("model"));
  const std::uint64_t seed = state.at("seed").get<std::uint64_t>();
  const int epoch = state.at("epoch").get<int>();
  const std::uint64_t epoch_seed = seed_combine(seed, static_cast<std::uint64_t>(epoch));

  auto load_truth = [&](const std::string& ref) -> std::optional<PlanarEmbedding> {
    if (!std::filesystem::exists(ref)) return std::nullopt;
    auto parsed = parse_molfile(detail::read_file(ref));
    if (!parsed.ok()) return std::nullopt;
    return std::move(*parsed.value);
  };

  if (phase == "predict") {
    for (const nlohmann::json& j : detail::read_jsonl("predict_request.jsonl")) {
      const std::string id = j.at("id").get<std::string>();
      const std::string ref = j.at("input_ref").get<std::string>();
      auto truth = load_truth(ref);
      if (!truth) continue;  // no output file = per-sample failure
      PlanarEmbedding pred = sim_predict_embedding(model, *truth, ref, epoch_seed);
      detail::write_file(id + ".mol", write_molfile(pred, id));
    }
    return 0;
  }

  if (phase == "score") {
    std::map<std::string, std::string> ref_of;  // sample id -> input_ref
    for (const nlohmann::json& j : detail::read_jsonl("predict_request.jsonl"))
      ref_of[j.at("id").get<std::string>()] = j.at("input_ref").get<std::string>();
    std::string lines;
    for (const nlohmann::json& j : detail::read_jsonl("score_request.jsonl")) {
      const std::string id = j.at("id").get<std::string>();
      const std::string sample_id = id.substr(0, id.rfind('#'));
      auto it = ref_of.find(sample_id);
      if (it == ref_of.end()) return 4;
      auto truth = load_truth(it->second);
      auto candidate = load_truth(j.at("candidate").get<std::string>());
      if (!truth || !candidate) return 4;
      nlohmann::json rec{{"id", id},
                         {"log_likelihood", sim_score_embedding(model, *truth, *candidate)}};
      lines += rec.dump();
      lines += '\n';
    }
    detail::write_file("scores.jsonl", lines);
    return 0;
  }

  if (phase == "train") {
    std::vector<WeightedSample> rich;
    for (const nlohmann::json& j : detail::read_jsonl("train_manifest.jsonl")) {
      auto embedding = load_truth(j.at("molfile").get<std::string>());
      if (!embedding) return 4;
      WeightedSample w;
      w.sample.id = j.at("id").get<std::string>();
      w.sample.rich_label = std::move(*embedding);
      w.copies = j.at("copies").get<long>();
      rich.push_back(std::move(w));
    }
    model = sim_retrain(model, rich);
    state["model"] = confusion_model_to_json(model);
    state["epoch"] = epoch + 1;
    detail::write_file(state_file, state.dump(2) + "\n");
    return 0;
  }

  return 4;  // unknown phase
}

}  // namespace graphalign

#endif
