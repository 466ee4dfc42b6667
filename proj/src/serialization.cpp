#include "psaug/serialization.hpp"

#include <initializer_list>
#include <sstream>
#include <string>

#include "psaug/errors.hpp"

namespace psaug {

using nlohmann::json;

namespace {

void expect_object(const json& j, const std::string& where,
                   std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw StructuralError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : allowed) known = known || key == k;
    if (!known) throw StructuralError("config: unknown key '" + where + "." + key + "'");
  }
}

template <class T>
void read_field(const json& j, const char* key, const std::string& where, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw StructuralError("expected a boolean");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) throw StructuralError("expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw StructuralError("expected a number");
    } else {
      if (!it->is_string()) throw StructuralError("expected a string");
    }
    out = it->get<T>();
  } catch (const std::exception& e) {
    throw StructuralError("config: '" + where + "." + key + "': " + e.what());
  }
}

json ibf_to_json(const IbfParams& p) { return {{"s", p.s}, {"a", p.a}}; }

IbfParams ibf_from_json(const json& j, const std::string& where, IbfParams p) {
  expect_object(j, where, {"s", "a"});
  read_field(j, "s", where, p.s);
  read_field(j, "a", where, p.a);
  return p;
}

ChannelRange channel_from_json(const json& j, const std::string& where, ChannelRange r) {
  expect_object(j, where, {"p_start", "p_end"});
  read_field(j, "p_start", where, r.p_start);
  read_field(j, "p_end", where, r.p_end);
  return r;
}

json event_to_json(const AugEvent& event) {
  if (const auto* e = std::get_if<TimeMask>(&event)) {
    return {{"op", "time_mask"}, {"t1", e->t1}, {"t2", e->t2}};
  }
  if (const auto* e = std::get_if<FreqMask>(&event)) {
    return {{"op", "freq_mask"}, {"f1", e->f1}, {"f2", e->f2}};
  }
  const auto& e = std::get<TimeSub>(event);
  return {{"op", "time_sub"}, {"dest_t", e.dest_t}, {"src_t", e.src_t}, {"width", e.width}};
}

AugEvent event_from_json(const json& j) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "time_mask") return TimeMask{j.at("t1").get<std::size_t>(), j.at("t2").get<std::size_t>()};
  if (op == "freq_mask") return FreqMask{j.at("f1").get<std::size_t>(), j.at("f2").get<std::size_t>()};
  if (op == "time_sub") {
    return TimeSub{j.at("dest_t").get<std::size_t>(), j.at("src_t").get<std::size_t>(),
                   j.at("width").get<std::size_t>()};
  }
  throw StructuralError("report: unknown event op '" + op + "'");
}

Gate gate_from_string(std::string_view name) {
  if (name == "adaptive") return Gate::kAdaptive;
  if (name == "fixed") return Gate::kFixed;
  throw StructuralError("unknown gate '" + std::string(name) + "'");
}

}  // namespace

const char* to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::kHybrid: return "hybrid";
    case PolicyKind::kRank: return "rank";
    case PolicyKind::kFixed: return "fixed";
  }
  return "?";
}

const char* to_string(Stage stage) noexcept {
  return stage == Stage::kPretrain ? "pretrain" : "adaptive";
}

const char* to_string(Gate gate) noexcept {
  return gate == Gate::kAdaptive ? "adaptive" : "fixed";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  if (name == "hybrid") return PolicyKind::kHybrid;
  if (name == "rank") return PolicyKind::kRank;
  if (name == "fixed") return PolicyKind::kFixed;
  throw StructuralError("unknown policy kind '" + std::string(name) +
                        "' (expected hybrid, rank or fixed)");
}

Stage stage_from_string(std::string_view name) {
  if (name == "pretrain") return Stage::kPretrain;
  if (name == "adaptive") return Stage::kAdaptive;
  throw StructuralError("unknown stage '" + std::string(name) + "' (expected pretrain or adaptive)");
}

json config_to_json(const EngineConfig& c) {
  return {
      {"policy_kind", to_string(c.policy_kind)},
      {"stage", to_string(c.stage)},
      {"master_seed", c.master_seed},
      {"epoch_offset", c.epoch_offset},
      {"threads", c.threads},
      {"ibf", ibf_to_json(c.ibf)},
      {"clip_spread", c.clip_spread == ClipSpread::kVariance ? "variance" : "stddev"},
      {"multipliers",
       {{"time_mask", c.multipliers.time_mask},
        {"freq_mask", c.multipliers.freq_mask},
        {"time_sub", c.multipliers.time_sub}}},
      {"limits",
       {{"max_t_width", c.limits.max_t_width},
        {"max_f_width", c.limits.max_f_width},
        {"max_sub_width", c.limits.max_sub_width},
        {"arbitrary_sub_source", c.limits.arbitrary_sub_source}}},
      {"schedule",
       {{"total_epochs", c.schedule.total_epochs},
        {"ibf", ibf_to_json(c.schedule.ibf)},
        {"mask", {{"p_start", c.schedule.mask.p_start}, {"p_end", c.schedule.mask.p_end}}},
        {"sub", {{"p_start", c.schedule.sub.p_start}, {"p_end", c.schedule.sub.p_end}}}}},
  };
}

EngineConfig config_from_json(const json& j, const EngineConfig& base) {
  expect_object(j, "config",
                {"policy_kind", "stage", "master_seed", "epoch_offset", "threads", "ibf",
                 "clip_spread", "multipliers", "limits", "schedule"});
  EngineConfig c = base;
  std::string text;
  if (j.contains("policy_kind")) {
    read_field(j, "policy_kind", "config", text);
    c.policy_kind = policy_kind_from_string(text);
  }
  if (j.contains("stage")) {
    read_field(j, "stage", "config", text);
    c.stage = stage_from_string(text);
  }
  read_field(j, "master_seed", "config", c.master_seed);
  read_field(j, "epoch_offset", "config", c.epoch_offset);
  read_field(j, "threads", "config", c.threads);
  if (j.contains("ibf")) c.ibf = ibf_from_json(j["ibf"], "ibf", c.ibf);
  if (j.contains("clip_spread")) {
    read_field(j, "clip_spread", "config", text);
    if (text == "variance") {
      c.clip_spread = ClipSpread::kVariance;
    } else if (text == "stddev") {
      c.clip_spread = ClipSpread::kStdDev;
    } else {
      throw StructuralError("config: clip_spread must be 'variance' or 'stddev'");
    }
  }
  if (j.contains("multipliers")) {
    const json& m = j["multipliers"];
    expect_object(m, "multipliers", {"time_mask", "freq_mask", "time_sub"});
    read_field(m, "time_mask", "multipliers", c.multipliers.time_mask);
    read_field(m, "freq_mask", "multipliers", c.multipliers.freq_mask);
    read_field(m, "time_sub", "multipliers", c.multipliers.time_sub);
  }
  if (j.contains("limits")) {
    const json& l = j["limits"];
    expect_object(l, "limits", {"max_t_width", "max_f_width", "max_sub_width", "arbitrary_sub_source"});
    read_field(l, "max_t_width", "limits", c.limits.max_t_width);
    read_field(l, "max_f_width", "limits", c.limits.max_f_width);
    read_field(l, "max_sub_width", "limits", c.limits.max_sub_width);
    read_field(l, "arbitrary_sub_source", "limits", c.limits.arbitrary_sub_source);
  }
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    expect_object(s, "schedule", {"total_epochs", "ibf", "mask", "sub"});
    read_field(s, "total_epochs", "schedule", c.schedule.total_epochs);
    if (s.contains("ibf")) c.schedule.ibf = ibf_from_json(s["ibf"], "schedule.ibf", c.schedule.ibf);
    if (s.contains("mask")) c.schedule.mask = channel_from_json(s["mask"], "schedule.mask", c.schedule.mask);
    if (s.contains("sub")) c.schedule.sub = channel_from_json(s["sub"], "schedule.sub", c.schedule.sub);
  }
  c.validate();
  return c;
}

EngineConfig parse_config(std::string_view text, const EngineConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw StructuralError(std::string("config: malformed JSON: ") + e.what());
  }
  return config_from_json(j, base);
}

json trace_to_json(const LossPipelineTrace& t) {
  return {{"l_raw", t.l_raw},         {"l_clipped", t.l_clipped}, {"l_meannorm", t.l_meannorm},
          {"l_minmax", t.l_minmax},   {"lambda", t.lambda},       {"l_mean", t.l_mean},
          {"l_var", t.l_var},         {"clip_low", t.clip_low},   {"clip_high", t.clip_high}};
}

json schedule_to_json(const ScheduleState& s) {
  return {{"epoch", s.epoch}, {"epoch_policy", s.epoch_policy}, {"p_mask", s.p_mask},
          {"p_sub", s.p_sub}};
}

std::string report_to_jsonl(const BatchAugReport& report) {
  std::string out;
  json header = {
      {"record", "batch"},
      {"epoch", report.epoch},
      {"batch_index", report.batch_index},
      {"policy_kind", to_string(report.policy_kind)},
      {"stage", to_string(report.stage)},
      {"schedule", report.schedule ? schedule_to_json(*report.schedule) : json(nullptr)},
      {"trace", trace_to_json(report.trace)},
  };
  out += header.dump();
  out += '\n';
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const SampleReport& s = report.samples[i];
    json plan = json::array();
    for (const auto& e : s.plan) plan.push_back(event_to_json(e));
    json line = {
        {"record", "sample"},
        {"index", i},
        {"sample_id", s.sample_id},
        {"lambda", s.lambda},
        {"gate_mask", to_string(s.gate_mask)},
        {"gate_sub", to_string(s.gate_sub)},
        {"counts",
         {{"time_mask", s.counts.n_time_mask},
          {"freq_mask", s.counts.n_freq_mask},
          {"time_sub", s.counts.n_time_sub}}},
        {"plan", plan},
    };
    out += line.dump();
    out += '\n';
  }
  return out;
}

BatchAugReport report_from_jsonl(std::string_view text) {
  BatchAugReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string record = j.at("record").get<std::string>();
      if (record == "batch") {
        report.epoch = j.at("epoch").get<std::uint64_t>();
        report.batch_index = j.at("batch_index").get<std::uint64_t>();
        report.policy_kind = policy_kind_from_string(j.at("policy_kind").get<std::string>());
        report.stage = stage_from_string(j.at("stage").get<std::string>());
        if (!j.at("schedule").is_null()) {
          const json& s = j["schedule"];
          report.schedule = ScheduleState{s.at("epoch").get<std::uint64_t>(),
                                          s.at("epoch_policy").get<double>(),
                                          s.at("p_mask").get<double>(), s.at("p_sub").get<double>()};
        }
        const json& t = j.at("trace");
        auto& tr = report.trace;
        tr.l_raw = t.at("l_raw").get<std::vector<double>>();
        tr.l_clipped = t.at("l_clipped").get<std::vector<double>>();
        tr.l_meannorm = t.at("l_meannorm").get<std::vector<double>>();
        tr.l_minmax = t.at("l_minmax").get<std::vector<double>>();
        tr.lambda = t.at("lambda").get<std::vector<double>>();
        tr.l_mean = t.at("l_mean").get<double>();
        tr.l_var = t.at("l_var").get<double>();
        tr.clip_low = t.at("clip_low").get<double>();
        tr.clip_high = t.at("clip_high").get<double>();
        have_header = true;
      } else if (record == "sample") {
        SampleReport s;
        s.sample_id = j.at("sample_id").get<std::string>();
        s.lambda = j.at("lambda").get<double>();
        s.gate_mask = gate_from_string(j.at("gate_mask").get<std::string>());
        s.gate_sub = gate_from_string(j.at("gate_sub").get<std::string>());
        const json& c = j.at("counts");
        s.counts = {c.at("time_mask").get<std::size_t>(), c.at("freq_mask").get<std::size_t>(),
                    c.at("time_sub").get<std::size_t>()};
        for (const auto& e : j.at("plan")) s.plan.push_back(event_from_json(e));
        report.samples.push_back(std::move(s));
      } else {
        throw StructuralError("unknown record type '" + record + "'");
      }
    } catch (const StructuralError&) {
      throw;
    } catch (const std::exception& e) {
      throw StructuralError(std::string("report: malformed line: ") + e.what());
    }
  }
  if (!have_header) throw StructuralError("report: missing batch header line");
  return report;
}

}  // namespace psaug
