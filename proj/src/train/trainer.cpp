#include "mpgan/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mpgan::train {

namespace fs = std::filesystem;
using namespace nets;
using torch::Tensor;

TrainConfig TrainConfig::make(int pass, int factor, LossKind kind, bool desk_scale) {
  TrainConfig c;
  c.pass = pass;
  c.factor = factor;
  c.loss = LossWeights::defaults(kind);
  if (pass == 2) {
    c.schedule = ScheduleConfig::second_pass();
  } else {
    c.schedule = factor == 8 ? ScheduleConfig::first_pass_8x() : ScheduleConfig::first_pass_4x();
  }
  c.desk_scale = desk_scale;
  if (desk_scale) c.schedule = c.schedule.scaled(kDeskScaleDivisor);
  return c;
}

void TrainConfig::validate() const {
  if (pass != 1 && pass != 2) throw ValidationError("pass must be 1 or 2");
  if (factor != 4 && factor != 8) throw ValidationError("factor must be 4 or 8");
  loss.validate();
  adam.validate();
  schedule.validate();
  if (spatial_batch < 1 || temporal_batch < 3 || temporal_batch % 3 != 0) {
    throw ValidationError("batch sizes must be positive and the temporal batch a multiple of 3");
  }
  if (iterations < 0 || checkpoint_every < 1 || divergence_patience < 1) {
    throw ValidationError("iteration counts must be positive");
  }
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"pass", pass},
          {"factor", factor},
          {"loss", {{"kind", to_string(loss.kind)}, {"l1", loss.l1}, {"gp", loss.gp}, {"feature", loss.feature}}},
          {"adam", {{"lr", adam.lr}, {"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}}},
          {"schedule",
           {{"growing", schedule.growing},
            {"first_stage", schedule.first_stage},
            {"final_stage", schedule.final_stage},
            {"blend_iters", schedule.blend_iters},
            {"stabilize_iters", schedule.stabilize_iters},
            {"decay_iters", schedule.decay_iters}}},
          {"spatial_batch", spatial_batch},
          {"temporal_batch", temporal_batch},
          {"desk_scale", desk_scale},
          {"iterations", iterations},
          {"seed", seed},
          {"dt", dt},
          {"checkpoint_every", checkpoint_every},
          {"divergence_patience", divergence_patience},
          {"divergence_threshold", divergence_threshold}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  try {
    TrainConfig c = make(j.value("pass", 1), j.value("factor", 8),
                         parse_loss_kind(j.contains("loss") ? j["loss"].value("kind", "wgan_gp") : "wgan_gp"),
                         j.value("desk_scale", false));
    if (j.contains("loss")) {
      const auto& l = j["loss"];
      c.loss.l1 = l.value("l1", c.loss.l1);
      c.loss.gp = l.value("gp", c.loss.gp);
      c.loss.feature = l.value("feature", c.loss.feature);
    }
    if (j.contains("adam")) {
      const auto& a = j["adam"];
      c.adam = {a.value("lr", c.adam.lr), a.value("beta1", c.adam.beta1), a.value("beta2", c.adam.beta2),
                a.value("eps", c.adam.eps)};
    }
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      c.schedule.growing = s.value("growing", c.schedule.growing);
      c.schedule.first_stage = s.value("first_stage", c.schedule.first_stage);
      c.schedule.final_stage = s.value("final_stage", c.schedule.final_stage);
      c.schedule.blend_iters = s.value("blend_iters", c.schedule.blend_iters);
      c.schedule.stabilize_iters = s.value("stabilize_iters", c.schedule.stabilize_iters);
      c.schedule.decay_iters = s.value("decay_iters", c.schedule.decay_iters);
    }
    c.spatial_batch = j.value("spatial_batch", c.spatial_batch);
    c.temporal_batch = j.value("temporal_batch", c.temporal_batch);
    c.iterations = j.value("iterations", c.iterations);
    c.seed = j.value("seed", c.seed);
    c.dt = j.value("dt", c.dt);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.divergence_patience = j.value("divergence_patience", c.divergence_patience);
    c.divergence_threshold = j.value("divergence_threshold", c.divergence_threshold);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad training config: ") + e.what());
  }
}

NetworkSet networks_for(int pass, int factor) {
  if (factor == 8) {
    if (pass == 1) return {build_g1_8x(), build_d1s_8x(), build_d1t_8x()};
    if (pass == 2) return {build_g2_8x(), build_d2s_8x(), build_d2t_8x()};
  } else if (factor == 4) {
    if (pass == 1) return {build_g_4x(), build_d_4x(Critic::Spatial), build_d_4x(Critic::Temporal)};
    if (pass == 2) return {build_g2_4x(), build_d_4x(Critic::Spatial, true), build_d_4x(Critic::Temporal, true)};
  }
  throw ValidationError("no networks for pass " + std::to_string(pass) + " at factor " + std::to_string(factor));
}

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> cols = {
      "iteration",      "stage",     "alpha",     "lr_scale", "d_spatial", "d_temporal", "gp_spatial",
      "gp_temporal",    "g_adv_spatial", "g_adv_temporal", "g_feature", "g_l1", "g_total", "skipped",
      "wall_seconds"};
  return cols;
}

std::string StepRecord::csv_row() const {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%lld,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%.6f",
                static_cast<long long>(iteration), stage, alpha, lr_scale, d_spatial, d_temporal, gp_spatial,
                gp_temporal, g_adv_spatial, g_adv_temporal, g_feature, g_l1, g_total, skipped ? 1 : 0, wall_seconds);
  return buf;
}

namespace {

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) { return seed * 0x9E3779B97F4A7C15ULL + k; }

Tensor stack(const std::vector<const Volume*>& v) { return nets::stack_slices(v, torch::kFloat32); }

// Real images at a coarser stage: box-pooled, then faded exactly like the
// generator output so the critic cannot tell stages apart by blur.
Tensor real_at_stage(const Tensor& full, int pool, const GrowthState& g, bool fading) {
  Tensor r = pool > 1 ? torch::avg_pool2d(full, pool) : full;
  if (fading && g.stage > 0) r = g.alpha * r + (1 - g.alpha) * nets::avg_depool(nets::avg_pool(r));
  return r;
}

double value(const Tensor& t) { return t.defined() ? t.item<double>() : 0.0; }

bool finite(const Tensor& t) { return !t.defined() || torch::isfinite(t).all().item<bool>(); }

}  // namespace

struct Trainer::Batch {
  Tensor x, y, cond;                  // spatial
  Tensor xt, yt, flow_prev, flow_next;  // temporal
};

Trainer::Trainer(TrainConfig cfg, TrainData data)
    : cfg_(std::move(cfg)), data_(std::move(data)), nets_(networks_for(cfg_.pass, cfg_.factor)) {
  cfg_.validate();
  const NetworkSpec& g = nets_.generator;
  if (cfg_.schedule.growing ? cfg_.schedule.final_stage != g.final_stage() : g.stages != 1) {
    throw ValidationError("schedule stages do not fit " + g.name);
  }
  if (data_.spatial.size() < static_cast<std::size_t>(cfg_.spatial_batch)) {
    throw ValidationError("spatial pool holds " + std::to_string(data_.spatial.size()) + " samples, batch needs " +
                          std::to_string(cfg_.spatial_batch));
  }
  const int out_side = g.side_at_stage(g.final_stage());
  for (const auto& s : data_.spatial) {
    if (s.input.channels() != g.in_channels || s.input.nx() != g.input_size || s.input.ny() != g.input_size ||
        s.target.nx() != out_side || s.target.ny() != out_side) {
      throw ValidationError(g.name + " expects " + std::to_string(g.in_channels) + "x" +
                            std::to_string(g.input_size) + "^2 inputs and " + std::to_string(out_side) +
                            "^2 targets; got " + std::to_string(s.input.channels()) + "x" + s.input.dims().str() +
                            " / " + s.target.dims().str());
    }
  }
  const int triplets = cfg_.temporal_batch / 3;
  if (!data_.temporal.empty()) {
    if (data_.temporal.size() < static_cast<std::size_t>(triplets)) {
      throw ValidationError("temporal pool smaller than one batch");
    }
    for (const auto& t : data_.temporal) {
      for (int k = 0; k < 3; ++k) {
        if (t.flows[k].channels() != 2 || t.flows[k].nx() != out_side || t.inputs[k].nx() != g.input_size) {
          throw ValidationError("temporal samples must carry 2-channel flows at target resolution");
        }
      }
    }
  }

  g_ = WeightStore::initialize(g, sub_seed(cfg_.seed, 1));
  ds_ = WeightStore::initialize(nets_.spatial, sub_seed(cfg_.seed, 2));
  dt_ = WeightStore::initialize(nets_.temporal, sub_seed(cfg_.seed, 3));
  for (WeightStore* w : {&g_, &ds_, &dt_}) w->set_requires_grad(true);
  opt_g_ = Adam(g_, cfg_.adam);
  opt_ds_ = Adam(ds_, cfg_.adam);
  opt_dt_ = Adam(dt_, cfg_.adam);
  spatial_stream_ = std::make_unique<data::BatchStream>(data_.spatial.size(), cfg_.spatial_batch, sub_seed(cfg_.seed, 4));
  if (!data_.temporal.empty()) {
    temporal_stream_ = std::make_unique<data::BatchStream>(data_.temporal.size(), triplets, sub_seed(cfg_.seed, 5));
  }
  mix_rng_.seed(sub_seed(cfg_.seed, 6));
}

GrowthState Trainer::growth_at(const SchedulePoint& p) const {
  if (!cfg_.schedule.growing) return {nets_.generator.final_stage(), 1.0};
  return {p.stage, p.alpha};
}

StepRecord Trainer::step() {
  const auto t0 = std::chrono::steady_clock::now();
  const SchedulePoint sp = curriculum_schedule(cfg_.schedule, iteration_);
  const GrowthState growth = growth_at(sp);
  const NetworkSpec& gs = nets_.generator;
  const int scale = generator_scale(gs, growth.stage);
  const int pool = gs.side_at_stage(gs.final_stage()) / gs.side_at_stage(growth.stage);
  const bool fading = cfg_.schedule.growing && sp.fading;

  StepRecord rec;
  rec.iteration = iteration_;
  rec.stage = growth.stage;
  rec.alpha = growth.alpha;
  rec.lr_scale = sp.lr_scale;

  Batch b;
  {
    std::vector<const Volume*> xs, ys;
    for (std::size_t i : spatial_stream_->next()) {
      xs.push_back(&data_.spatial[i].input);
      ys.push_back(&data_.spatial[i].target);
    }
    b.x = stack(xs);
    b.y = real_at_stage(stack(ys), pool, growth, fading);
    b.cond = nets::bicubic_upsample(b.x.narrow(1, 0, 1), scale);
  }
  const bool temporal = temporal_stream_ != nullptr;
  if (temporal) {
    std::vector<const Volume*> xs, ys, fp, fn;
    for (std::size_t i : temporal_stream_->next()) {
      const auto& t = data_.temporal[i];
      for (int k = 0; k < 3; ++k) xs.push_back(&t.inputs[k]);
      fp.push_back(&t.flows[0]);
      fn.push_back(&t.flows[2]);
      ys.insert(ys.end(), {&t.targets[0], &t.targets[1], &t.targets[2]});
    }
    b.xt = stack(xs);
    const std::int64_t n = b.xt.size(0) / 3;
    const Tensor y = stack(ys);
    b.yt = real_at_stage(y.view({n, 3, y.size(2), y.size(3)}), pool, growth, fading);
    auto flow = [&](const std::vector<const Volume*>& f) {
      const Tensor full = stack(f);
      return pool > 1 ? torch::avg_pool2d(full, pool) / pool : full;
    };
    b.flow_prev = flow(fp);
    b.flow_next = flow(fn);
  }

  // Generator forward, shared by both updates (the critic sees it detached).
  const Tensor fake = generate(gs, g_, b.x, growth);
  Tensor fake_triplet;
  if (temporal) {
    const Tensor ft = generate(gs, g_, b.xt, growth);
    const std::int64_t n = ft.size(0) / 3;
    const Tensor v = ft.view({n, 3, ft.size(2), ft.size(3)});
    fake_triplet = warped_triplet(v.narrow(1, 0, 1), v.narrow(1, 1, 1), v.narrow(1, 2, 1), b.flow_prev, b.flow_next,
                                  cfg_.dt);
  }

  auto spatial = [&](const Tensor& img, std::vector<Tensor>* feats = nullptr) {
    return criticize(nets_.spatial, ds_, torch::cat({b.cond, img}, 1), growth, feats);
  };
  auto temporal_critic = [&](const Tensor& trip) { return criticize(nets_.temporal, dt_, trip, growth); };

  // Critic update.
  const LossKind kind = cfg_.loss.kind;
  const CriticTerms cs = critic_objective(cfg_.loss, spatial, b.y, fake, mix_rng_);
  CriticTerms ct;
  if (temporal) ct = critic_objective(cfg_.loss, temporal_critic, b.yt, fake_triplet, mix_rng_);
  rec.d_spatial = value(cs.loss);
  rec.d_temporal = value(ct.loss);
  rec.gp_spatial = value(cs.penalty);
  rec.gp_temporal = value(ct.penalty);

  bool ok = finite(cs.loss) && finite(ct.loss);
  if (ok) {
    ok = opt_ds_.step(ds_, gradients(cs.loss, ds_), sp.lr_scale);
    if (ok && temporal) ok = opt_dt_.step(dt_, gradients(ct.loss, dt_), sp.lr_scale);
  }

  // Generator update against the refreshed critics.
  if (ok) {
    std::vector<Tensor> fake_taps, real_taps;
    const bool taps = kind == LossKind::Tempo;
    const Tensor fs = spatial(fake, taps ? &fake_taps : nullptr);
    if (taps) {
      torch::NoGradGuard guard;
      spatial(b.y, &real_taps);
    }
    const Tensor ft = temporal ? temporal_critic(fake_triplet) : Tensor();
    const GeneratorTerms gt = generator_objective(cfg_.loss, fs, ft, fake_taps, real_taps, fake, b.y);
    rec.g_adv_spatial = value(gt.adv_spatial);
    rec.g_adv_temporal = value(gt.adv_temporal);
    rec.g_feature = value(gt.feature);
    rec.g_l1 = value(gt.l1);
    rec.g_total = value(gt.total);
    ok = finite(gt.total) && opt_g_.step(g_, gradients(gt.total, g_), sp.lr_scale);
  }
  rec.skipped = !ok;

  const double worst = std::max({std::abs(rec.d_spatial), std::abs(rec.d_temporal), std::abs(rec.g_total)});
  if (!ok || !(worst <= cfg_.divergence_threshold)) {
    if (++bad_steps_ >= cfg_.divergence_patience) {
      std::ostringstream msg;
      msg << "training diverged: " << bad_steps_ << " consecutive bad steps up to iteration " << iteration_
          << " (d_spatial " << rec.d_spatial << ", d_temporal " << rec.d_temporal << ", g_total " << rec.g_total
          << ")";
      throw NumericalError(msg.str());
    }
  } else {
    bad_steps_ = 0;
  }

  ++iteration_;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

void Trainer::run(const fs::path& out_dir, const std::function<void(const StepRecord&)>& on_step) {
  std::ofstream log;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path p = out_dir / "train_log.csv";
    const bool fresh = iteration_ == 0 || !fs::exists(p);
    log.open(p, fresh ? std::ios::trunc : std::ios::app);
    if (!log) throw std::runtime_error("cannot open '" + p.string() + "'");
    if (fresh) {
      const auto& cols = log_columns();
      for (std::size_t i = 0; i < cols.size(); ++i) log << (i ? "," : "") << cols[i];
      log << '\n';
    }
  }
  const std::int64_t total = cfg_.total_iterations();
  while (iteration_ < total) {
    const StepRecord rec = step();
    if (log.is_open()) log << rec.csv_row() << '\n';
    if (on_step) on_step(rec);
    if (!out_dir.empty() && (iteration_ % cfg_.checkpoint_every == 0 || iteration_ == total)) {
      log.flush();
      save_checkpoint(out_dir / "checkpoint", checkpoint());
    }
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  ck.meta = {{"config", cfg_.to_json()},
             {"iteration", iteration_},
             {"bad_steps", bad_steps_},
             {"generator", nets_.generator.name},
             {"pass", cfg_.pass},
             {"factor", cfg_.factor},
             {"adam_steps", {{"G", opt_g_.steps()}, {"Ds", opt_ds_.steps()}, {"Dt", opt_dt_.steps()}}}};
  auto put = [&](const std::string& key, const WeightStore& w, const Adam& opt) {
    for (const auto& [name, t] : w.tensors()) ck.tensors[key + "/" + name] = t.detach();
    for (const auto& [name, t] : opt.first_moments()) ck.tensors["adam." + key + ".m/" + name] = t;
    for (const auto& [name, t] : opt.second_moments()) ck.tensors["adam." + key + ".v/" + name] = t;
  };
  put("G", g_, opt_g_);
  put("Ds", ds_, opt_ds_);
  put("Dt", dt_, opt_dt_);
  ck.states["spatial_stream"] = spatial_stream_->save_state();
  if (temporal_stream_) ck.states["temporal_stream"] = temporal_stream_->save_state();
  std::ostringstream rng;
  rng << mix_rng_;
  ck.states["mix_rng"] = rng.str();
  return ck;
}

void Trainer::resume(const Checkpoint& ck) {
  if (ck.meta.value("pass", 0) != cfg_.pass || ck.meta.value("factor", 0) != cfg_.factor) {
    throw ValidationError("checkpoint was written for a different pass or factor");
  }
  auto take = [&](const std::string& key, WeightStore& w, Adam& opt) {
    torch::NoGradGuard guard;
    std::map<std::string, Tensor> m, v;
    for (auto& [name, t] : w.tensors()) {
      const auto it = ck.tensors.find(key + "/" + name);
      if (it == ck.tensors.end() || it->second.sizes() != t.sizes()) {
        throw ValidationError("checkpoint lacks a matching '" + key + "/" + name + "'");
      }
      w.at(name).copy_(it->second);
      m[name] = ck.tensors.at("adam." + key + ".m/" + name).clone();
      v[name] = ck.tensors.at("adam." + key + ".v/" + name).clone();
    }
    opt.restore(std::move(m), std::move(v), ck.meta.at("adam_steps").at(key).get<std::int64_t>());
  };
  take("G", g_, opt_g_);
  take("Ds", ds_, opt_ds_);
  take("Dt", dt_, opt_dt_);
  spatial_stream_->load_state(ck.states.at("spatial_stream"));
  if (temporal_stream_) temporal_stream_->load_state(ck.states.at("temporal_stream"));
  std::istringstream rng(ck.states.at("mix_rng"));
  rng >> mix_rng_;
  iteration_ = ck.meta.at("iteration").get<std::int64_t>();
  bad_steps_ = ck.meta.value("bad_steps", 0);
}

GeneratorCheckpoint load_generator(const fs::path& dir) {
  const Checkpoint ck = load_checkpoint(dir);
  GeneratorCheckpoint out;
  out.pass = ck.meta.at("pass").get<int>();
  out.factor = ck.meta.at("factor").get<int>();
  out.spec = networks_for(out.pass, out.factor).generator;
  for (const auto& [name, shape] : parameter_shapes(out.spec)) {
    const auto it = ck.tensors.find("G/" + name);
    if (it == ck.tensors.end()) throw ValidationError("checkpoint lacks generator tensor '" + name + "'");
    out.weights.set(name, it->second);
  }
  out.weights.check(out.spec);
  return out;
}

}  // namespace mpgan::train
