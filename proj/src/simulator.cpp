#include "valvest/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "valvest/arma.hpp"
#include "valvest/catalog.hpp"
#include "valvest/csv.hpp"
#include "valvest/errors.hpp"

namespace valvest::sim {

namespace {

constexpr double kJitter = 0.10;
constexpr double kModulatingReversion = 0.98;

// Independent generator per purpose so adding noise to one channel leaves the others unchanged.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  return std::mt19937_64(seq);
}

double profile_mean(const Profile& p, double t_min) {
  return p.mean + p.amplitude * std::sin(2.0 * std::numbers::pi * t_min / p.period_min + p.phase);
}

class ValveController {
 public:
  ValveController(const Control& control, std::mt19937_64 rng) : control_(control), rng_(std::move(rng)) {
    if (const auto* h = std::get_if<Hysteresis>(&control_)) {
      period_ = draw_period(*h);
      start_ = -std::uniform_real_distribution<double>(0.0, period_)(rng_);
    } else {
      level_ = std::get<Modulating>(control_).mean;
    }
  }

  double next(double t_min) {
    if (const auto* h = std::get_if<Hysteresis>(&control_)) {
      while (t_min >= start_ + period_) {
        start_ += period_;
        period_ = draw_period(*h);
      }
      return t_min - start_ < h->duty * period_ ? 1.0 : 0.0;
    }
    const auto& m = std::get<Modulating>(control_);
    level_ = m.mean + kModulatingReversion * (level_ - m.mean) + m.wander * normal_(rng_);
    level_ = std::clamp(level_, 0.0, 1.0);
    return level_;
  }

 private:
  double draw_period(const Hysteresis& h) {
    return h.period_min * (1.0 + std::uniform_real_distribution<double>(-kJitter, kJitter)(rng_));
  }

  Control control_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double period_ = 0.0;
  double start_ = 0.0;
  double level_ = 0.0;
};

bool pressure_inside(const Profile& p, const thermo::SaturationTable& table) {
  const double margin = std::abs(p.amplitude) + 6.0 * p.noise_sd;
  return p.mean - margin >= table.min_pressure() && p.mean + margin <= table.max_pressure();
}

EvaporatorSpec hyst(std::string id, Group g, std::string valve, double period, double duty, double pe) {
  return {std::move(id), g, std::move(valve), Hysteresis{period, duty}, Profile{pe, 0.3, 1440.0, 0.0, 0.01}};
}

}  // namespace

void PlantSpec::validate(const thermo::SaturationTable& table) const {
  if (evaporators.empty()) throw DataError("plant has no evaporators");
  if (!(duration_days > 0.0)) throw DataError("duration must be positive");
  if (!(vs_m3 > 0.0)) throw DataError("stroke volume must be positive");
  if (!(eta_vol > 0.0 && eta_vol <= 1.0)) throw DataError("volumetric efficiency must lie in (0, 1]");
  if (!pressure_inside(p_rec, table)) throw DataError("receiver pressure profile leaves the saturation table");
  const double rec_low = p_rec.mean - std::abs(p_rec.amplitude) - 6.0 * p_rec.noise_sd;
  for (const auto& e : evaporators) {
    if (const auto* h = std::get_if<Hysteresis>(&e.control)) {
      if (!(h->duty > 0.0 && h->duty < 1.0)) throw DataError("hysteresis duty of " + e.id + " must lie in (0, 1)");
      if (!(h->period_min > 2.0)) throw DataError("hysteresis period of " + e.id + " is too short");
    } else {
      const auto& m = std::get<Modulating>(e.control);
      if (!(m.mean >= 0.0 && m.mean <= 1.0) || !(m.wander >= 0.0)) {
        throw DataError("modulating control of " + e.id + " is invalid");
      }
    }
    if (!(e.p_e.period_min > 0.0)) throw DataError("pressure period of " + e.id + " must be positive");
    if (!pressure_inside(e.p_e, table)) throw DataError("evaporator pressure of " + e.id + " leaves the table");
    if (!(e.p_e.mean + std::abs(e.p_e.amplitude) + 6.0 * e.p_e.noise_sd < rec_low)) {
      throw DataError("receiver pressure does not stay above the evaporator pressure of " + e.id);
    }
  }
  if (!(noise.sigma2 >= 0.0) || !(noise.p_sd >= 0.0) || !(noise.lambda_sd >= 0.0) || !(noise.h_sd >= 0.0) ||
      !(noise.f_sd >= 0.0)) {
    throw DataError("noise levels must be non-negative");
  }
}

Simulation simulate(const PlantSpec& spec, const thermo::SaturationTable& table) {
  spec.validate(table);
  const auto& catalog = ValveCatalog::bundled();

  std::vector<EvaporatorSpec> evs = spec.evaporators;
  std::stable_partition(evs.begin(), evs.end(), [](const EvaporatorSpec& e) { return e.group == Group::LT; });
  const std::size_t nv = evs.size();
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_days * 1440.0));
  if (n < 2) throw DataError("duration shorter than two samples");

  Simulation out;
  auto& ds = out.data;
  auto& gt = out.truth;
  ds.start = std::chrono::sys_days{std::chrono::year{2024} / 1 / 1};
  ds.dt = std::chrono::seconds{60};
  ds.p_rec.resize(n);
  ds.f_comp.resize(n);
  ds.h_gc.resize(n);
  ds.p_e.assign(nv, Channel(n));
  ds.lambda.assign(nv, Channel(n));
  gt.a.resize(static_cast<Eigen::Index>(nv));
  for (std::size_t i = 0; i < nv; ++i) {
    ds.evaporators.push_back({evs[i].id, evs[i].group});
    gt.ids.push_back(evs[i].id);
    gt.valves.push_back(evs[i].valve);
    gt.a(static_cast<Eigen::Index>(i)) = catalog.find(evs[i].valve).a;
  }
  gt.vs_m3 = spec.vs_m3;
  gt.eta_vol = spec.eta_vol;
  gt.noise = spec.noise;
  if (spec.log_internals) {
    gt.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nv));
    gt.m_cab.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nv));
  }

  std::vector<ValveController> valves;
  for (std::size_t i = 0; i < nv; ++i) valves.emplace_back(evs[i].control, stream(spec.seed, 100 + i));
  auto pressure_rng = stream(spec.seed, 1);
  auto measure_rng = stream(spec.seed, 2);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> disturbance(n, 0.0);
  if (spec.noise.sigma2 > 0.0) {
    disturbance = arma::simulate_arma(spec.noise.phi, spec.noise.theta, spec.noise.sigma2, n, spec.seed ^ 0x9e3779b97f4a7c15ULL);
  }
  gt.disturbance = Eigen::Map<const Eigen::VectorXd>(disturbance.data(), static_cast<Eigen::Index>(n));

  const design::SystemConstants consts{spec.vs_m3, spec.eta_vol};
  const bool has_mt = std::any_of(evs.begin(), evs.end(), [](const auto& e) { return e.group == Group::MT; });
  std::vector<double> pe(nv);
  std::vector<double> lam(nv);
  for (std::size_t t = 0; t < n; ++t) {
    const double tm = static_cast<double>(t);
    const double p_rec = profile_mean(spec.p_rec, tm) + spec.p_rec.noise_sd * normal(pressure_rng);
    const double h_gc = profile_mean(spec.h_gc, tm) + spec.h_gc.noise_sd * normal(pressure_rng);
    const double rho_liq = table.props(p_rec).rho_liq;
    double total = 0.0;
    double p_suction = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nv; ++i) {
      pe[i] = profile_mean(evs[i].p_e, tm) + evs[i].p_e.noise_sd * normal(pressure_rng);
      lam[i] = valves[i].next(tm);
      if (!has_mt || evs[i].group == Group::MT) p_suction = std::max(p_suction, pe[i]);
      const double x = design::regressor(p_rec, pe[i], lam[i], rho_liq);
      const double m = x * gt.a(static_cast<Eigen::Index>(i));
      total += m;
      if (spec.log_internals) {
        gt.x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = x;
        gt.m_cab(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = m;
      }
    }
    // Mass balance: (1 - Q) m_MT equals the liquid the cabinets draw.
    const double q = table.gas_quality(h_gc, p_rec);
    const double per_unit_load = (1.0 - q) * design::compressor_massflow(1.0, consts, table.props(p_suction).rho_gas);
    const double f_true = total / per_unit_load;
    if (f_true > 1.0) {
      throw InfeasibleSpec("compressor demand " + csv::format_fixed(f_true, 3) + " exceeds full load at " +
                           format_rfc3339(ds.time_at(t)));
    }
    double f = f_true + disturbance[t] / per_unit_load;
    if (f < 0.0 || f > 1.0) {
      ++gt.clipped;
      f = std::clamp(f, 0.0, 1.0);
    }

    const auto& nz = spec.noise;
    ds.p_rec[t] = nz.p_sd > 0.0 ? p_rec + nz.p_sd * normal(measure_rng) : p_rec;
    ds.h_gc[t] = nz.h_sd > 0.0 ? h_gc + nz.h_sd * normal(measure_rng) : h_gc;
    ds.f_comp[t] = nz.f_sd > 0.0 ? std::clamp(f + nz.f_sd * normal(measure_rng), 0.0, 1.0) : f;
    for (std::size_t i = 0; i < nv; ++i) {
      ds.p_e[i][t] = nz.p_sd > 0.0 ? pe[i] + nz.p_sd * normal(measure_rng) : pe[i];
      ds.lambda[i][t] = nz.lambda_sd > 0.0 ? std::clamp(lam[i] + nz.lambda_sd * normal(measure_rng), 0.0, 1.0) : lam[i];
    }
  }
  return out;
}

std::vector<double> ar_from_roots(const std::vector<double>& roots) {
  // prod (1 - r_k B) = 1 - sum phi_k B^k
  std::vector<double> poly{1.0};
  for (double r : roots) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t j = 0; j < poly.size(); ++j) {
      next[j] += poly[j];
      next[j + 1] -= r * poly[j];
    }
    poly = std::move(next);
  }
  std::vector<double> phi;
  for (std::size_t k = 1; k < poly.size(); ++k) phi.push_back(-poly[k]);
  return phi;
}

std::vector<PlantSpec> scenario_presets() {
  PlantSpec base;
  base.name = "otterup-like";
  base.evaporators = {
      hyst("LT1", Group::LT, "AKV 10-3", 31.19, 0.45, 13.2),
      hyst("LT2", Group::LT, "AKV 10-2", 25.59, 0.55, 13.6),
      hyst("LT3", Group::LT, "AKV 10-2", 20.37, 0.50, 12.8),
      hyst("LT4", Group::LT, "AKV 10-2", 30.24, 0.40, 13.9),
      hyst("MT1", Group::MT, "AKV 10-3", 83.17, 0.45, 28.3),
      hyst("MT2", Group::MT, "AKV 10-5", 32.19, 0.35, 27.9),
      hyst("MT3", Group::MT, "AKV 10-4", 39.92, 0.40, 28.1),
      hyst("MT4", Group::MT, "AKV 10-5", 41.58, 0.30, 28.6),
      hyst("MT5", Group::MT, "AKV 10-5", 41.58, 0.35, 27.6),
      hyst("MT6", Group::MT, "AKV 10-5", 21.23, 0.40, 28.4),
      {"MT7", Group::MT, "AKV 10-2", Modulating{0.7, 0.02}, Profile{28.0, 0.3, 1440.0, 0.5, 0.01}},
  };
  // Slowly varying phases keep the pressure profiles from moving in lockstep.
  for (std::size_t i = 0; i < base.evaporators.size(); ++i) base.evaporators[i].p_e.phase = 0.37 * static_cast<double>(i);
  base.noise.phi = ar_from_roots({0.99, 0.5, -0.3, 0.2});
  base.noise.theta = {0.3};
  base.noise.sigma2 = 2e-8;

  std::vector<PlantSpec> out;
  out.push_back(base);

  PlantSpec iid = base;
  iid.name = "iid-noise";
  iid.noise = {};
  iid.noise.sigma2 = 4e-6;
  out.push_back(iid);

  PlantSpec arma = base;
  arma.name = "arma-noise";
  arma.noise.sigma2 = 5e-8;
  out.push_back(arma);

  PlantSpec mod = base;
  mod.name = "modulating-only";
  for (auto& e : mod.evaporators) {
    const double duty = std::holds_alternative<Hysteresis>(e.control) ? std::get<Hysteresis>(e.control).duty : 0.5;
    e.control = Modulating{duty, 0.03};
  }
  out.push_back(mod);

  PlantSpec hy = base;
  hy.name = "hysteresis-only";
  hy.evaporators.back().control = Hysteresis{35.0, 0.7};
  out.push_back(hy);
  return out;
}

PlantSpec preset(const std::string& name) {
  for (auto& p : scenario_presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::string truth_csv(const GroundTruth& truth) {
  std::string out = "evaporator,A_true\n";
  for (std::size_t i = 0; i < truth.ids.size(); ++i) {
    out += truth.ids[i] + "," + csv::format_double(truth.a(static_cast<Eigen::Index>(i))) + "\n";
  }
  out += "vs_m3," + csv::format_double(truth.vs_m3) + "\n";
  return out;
}

}  // namespace valvest::sim
