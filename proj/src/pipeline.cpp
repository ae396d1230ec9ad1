#include "valvest/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "valvest/csv.hpp"
#include "valvest/errors.hpp"
#include "valvest/parallel.hpp"

namespace valvest::pipeline {

namespace {

using nlohmann::json;

std::string num(double v) { return csv::format_double(v); }

// Minimal deterministic SVG line chart.
struct Line {
  std::vector<double> x;
  std::vector<double> y;
  std::string colour = "#1f77b4";
  bool markers = false;
};

std::string svg_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Line>& lines, const std::optional<std::pair<std::vector<double>, std::vector<double>>>& band = {},
                      const std::vector<double>& band_x = {}) {
  constexpr double w = 640, h = 400, l = 70, r = 20, t = 40, b = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  auto extend = [&](const std::vector<double>& xs, const std::vector<double>& ys) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
      xmin = std::min(xmin, xs[i]);
      xmax = std::max(xmax, xs[i]);
      ymin = std::min(ymin, ys[i]);
      ymax = std::max(ymax, ys[i]);
    }
  };
  for (const auto& ln : lines) extend(ln.x, ln.y);
  if (band) {
    extend(band_x, band->first);
    extend(band_x, band->second);
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double v) { return csv::format_fixed(l + (v - xmin) / (xmax - xmin) * (w - l - r), 2); };
  auto py = [&](double v) { return csv::format_fixed(h - b - (v - ymin) / (ymax - ymin) * (h - t - b), 2); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
  s += "<line x1=\"70\" y1=\"350\" x2=\"620\" y2=\"350\" stroke=\"black\"/>\n";
  s += "<line x1=\"70\" y1=\"40\" x2=\"70\" y2=\"350\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    s += "<text x=\"" + px(xv) + "\" y=\"366\" text-anchor=\"middle\">" + csv::format_fixed(xv, 3) + "</text>\n";
    s += "<text x=\"64\" y=\"" + py(yv) + "\" text-anchor=\"end\">" + csv::format_fixed(yv, 4) + "</text>\n";
  }
  s += "<text x=\"345\" y=\"392\" text-anchor=\"middle\">" + xlabel + "</text>\n";
  s += "<text x=\"16\" y=\"195\" text-anchor=\"middle\" transform=\"rotate(-90 16 195)\">" + ylabel + "</text>\n";
  if (band && !band_x.empty()) {
    std::string pts;
    for (std::size_t i = 0; i < band_x.size(); ++i) {
      if (std::isfinite(band->second[i])) pts += px(band_x[i]) + "," + py(band->second[i]) + " ";
    }
    for (std::size_t i = band_x.size(); i-- > 0;) {
      if (std::isfinite(band->first[i])) pts += px(band_x[i]) + "," + py(band->first[i]) + " ";
    }
    s += "<polygon points=\"" + pts + "\" fill=\"#1f77b4\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
  }
  for (const auto& ln : lines) {
    std::string pts;
    for (std::size_t i = 0; i < ln.x.size(); ++i) {
      if (std::isfinite(ln.y[i])) pts += px(ln.x[i]) + "," + py(ln.y[i]) + " ";
    }
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + ln.colour + "\" stroke-width=\"1.5\"/>\n";
    if (ln.markers) {
      for (std::size_t i = 0; i < ln.x.size(); ++i) {
        if (std::isfinite(ln.y[i])) {
          s += "<circle cx=\"" + px(ln.x[i]) + "\" cy=\"" + py(ln.y[i]) + "\" r=\"2.5\" fill=\"" + ln.colour + "\"/>\n";
        }
      }
    }
  }
  s += "</svg>\n";
  return s;
}

std::string acf_csv(const ols::DiagnosticsReport& d) {
  std::string out = "lag,acf,conf_band\n";
  for (std::size_t k = 0; k < d.acf.size(); ++k) {
    out += std::to_string(k + 1) + "," + num(d.acf[k]) + "," + num(d.conf_band) + "\n";
  }
  return out;
}

std::string acf_svg(const ols::DiagnosticsReport& d, const std::string& title) {
  Line acf;
  acf.markers = true;
  Line hi{{}, {}, "#d62728"};
  Line lo{{}, {}, "#d62728"};
  for (std::size_t k = 0; k < d.acf.size(); ++k) {
    acf.x.push_back(static_cast<double>(k + 1));
    acf.y.push_back(d.acf[k]);
    hi.x.push_back(static_cast<double>(k + 1));
    hi.y.push_back(d.conf_band);
    lo.x.push_back(static_cast<double>(k + 1));
    lo.y.push_back(-d.conf_band);
  }
  return svg_chart(title, "lag", "autocorrelation", {acf, hi, lo});
}

std::string coefficient_csv(const std::vector<std::string>& labels, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& se, const std::vector<ols::Interval>& ci) {
  std::string out = "evaporator,beta,se,ci_lo,ci_hi\n";
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out += labels[j] + "," + num(beta(jj)) + "," + num(se(jj)) + "," + num(ci[j].lo) + "," + num(ci[j].hi) + "\n";
  }
  return out;
}

ColumnMapping mapping_from_json(const json& j, const std::string& default_unit) {
  if (j.is_string()) return {j.get<std::string>(), default_unit};
  return {j.at("column").get<std::string>(), j.value("unit", default_unit)};
}

Group group_from_string(const std::string& s) {
  if (s == "LT") return Group::LT;
  if (s == "MT") return Group::MT;
  throw DataError("evaporator group must be LT or MT, got '" + s + "'");
}

}  // namespace

std::string to_string(Model m) { return m == Model::Ols ? "ols" : "armax"; }

Model parse_model(const std::string& name) {
  if (name == "ols") return Model::Ols;
  if (name == "armax") return Model::Armax;
  throw DataError("unknown model '" + name + "' (expected ols or armax)");
}

std::vector<Model> parse_models(const std::string& text) {
  std::vector<Model> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    out.push_back(parse_model(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

RunConfig::RunConfig() {
  for (int m = 1; m <= 30; ++m) sweep.push_back(m);
}

void RunConfig::validate_sweep() const {
  if (sweep.empty()) throw DataError("sampling-time sweep is empty");
  std::set<int> seen;
  for (int m : sweep) {
    if (m < 1 || m > 30) throw DataError("sampling time " + std::to_string(m) + " min is outside [1, 30]");
    if (!seen.insert(m).second) throw DataError("sampling time " + std::to_string(m) + " min listed twice");
  }
}

RunConfig RunConfig::from_json(const std::string& text, const std::filesystem::path& base) {
  RunConfig cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("config is not valid JSON: ") + e.what());
  }
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
  };
  try {
    if (j.contains("dataset")) cfg.dataset = resolve(j["dataset"].get<std::string>());
    if (j.contains("schema")) {
      const auto& s = j["schema"];
      Schema schema;
      schema.timestamp_column = s.value("timestamp", schema.timestamp_column);
      if (s.contains("p_rec")) schema.p_rec = mapping_from_json(s["p_rec"], "bar");
      if (s.contains("f_comp")) schema.f_comp = mapping_from_json(s["f_comp"], "fraction");
      if (s.contains("h_gc")) schema.h_gc = mapping_from_json(s["h_gc"], "J/kg");
      for (const auto& e : s.at("evaporators")) {
        EvaporatorMapping m;
        m.id = e.at("id").get<std::string>();
        m.group = group_from_string(e.at("group").get<std::string>());
        m.p_e = mapping_from_json(e.at("p_e"), "bar");
        m.lambda = mapping_from_json(e.at("lambda"), "fraction");
        schema.evaporators.push_back(std::move(m));
      }
      cfg.schema = std::move(schema);
    }
    if (j.contains("system")) {
      const auto& s = j["system"];
      if (s.contains("vs_m3")) cfg.vs_m3 = s["vs_m3"].get<double>();
      cfg.eta_vol = s.value("eta_vol", cfg.eta_vol);
    }
    if (j.contains("sweep")) {
      if (j["sweep"].is_string()) {
        cfg.sweep = parse_sweep(j["sweep"].get<std::string>());
      } else {
        cfg.sweep = j["sweep"].get<std::vector<int>>();
      }
    }
    if (j.contains("models")) {
      cfg.models.clear();
      for (const auto& m : j["models"]) cfg.models.push_back(parse_model(m.get<std::string>()));
    }
    if (j.contains("armax")) {
      cfg.armax.p = j["armax"].value("p", cfg.armax.p);
      cfg.armax.q = j["armax"].value("q", cfg.armax.q);
    }
    cfg.sampling_min = j.value("sampling_min", cfg.sampling_min);
    if (j.contains("output_dir")) cfg.output_dir = resolve(j["output_dir"].get<std::string>());
    cfg.seed = j.value("seed", cfg.seed);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.svg = j.value("svg", cfg.svg);
    if (j.contains("catalog")) cfg.catalog = resolve(j["catalog"].get<std::string>());
    if (j.contains("vs_guess")) cfg.vs_guess = j["vs_guess"].get<double>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

std::vector<int> parse_sweep(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  auto to_int = [&](const std::string& s) {
    const auto v = csv::to_double(s);
    if (v != std::floor(v)) throw DataError("sampling time '" + s + "' is not a whole number");
    return static_cast<int>(v);
  };
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto dots = item.find("..");
    if (item.empty()) throw DataError("empty entry in sweep '" + text + "'");
    if (dots != std::string::npos) {
      const int a = to_int(item.substr(0, dots));
      const int b = to_int(item.substr(dots + 2));
      if (b < a) throw DataError("descending range '" + item + "'");
      for (int m = a; m <= b; ++m) out.push_back(m);
    } else {
      out.push_back(to_int(item));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

PlantDataset load_dataset(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw DataError("no dataset given");
  const std::string text = csv::read_file(cfg.dataset);
  return cfg.schema ? parse_dataset(text, *cfg.schema) : parse_dataset(text);
}

PlantDataset resample_to(const PlantDataset& ds, int minutes) {
  const long long target = 60LL * minutes;
  const long long src = ds.dt.count();
  if (minutes < 1 || src <= 0 || target % src != 0) {
    throw DataError("cannot resample " + std::to_string(src) + " s data to " + std::to_string(minutes) + " min");
  }
  const int factor = static_cast<int>(target / src);
  return factor == 1 ? ds : resample_average(ds, factor);
}

void write_outputs(const std::filesystem::path& dir, const Outputs& files) {
  for (const auto& f : files) csv::write_file(dir / f.name, f.content);
}

std::vector<SpectrumRow> spectrum_analysis(const PlantDataset& ds, const thermo::SaturationTable& table,
                                           std::size_t jobs) {
  std::vector<SpectrumRow> rows(ds.n_evaporators());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    auto& row = rows[i];
    row.evaporator = ds.evaporators[i].id;
    try {
      const auto x = design::regressor_channel(ds, i, table);
      row.periodogram = spectrum::periodogram(ds.series(x), row.evaporator);
      row.cycle = spectrum::dominant_cycle(*row.periodogram);
      row.optimal_dt_min = spectrum::optimal_sampling_time(*row.cycle);
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  return rows;
}

Outputs spectrum_outputs(const std::vector<SpectrumRow>& rows, bool svg) {
  Outputs out;
  std::string summary = "evaporator,cycle_min,prominence,optimal_dt_min,low_confidence,status\n";
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      summary += r.evaporator + ",,,,," + csv::escape("error: " + r.error) + "\n";
      continue;
    }
    summary += r.evaporator + "," + num(r.cycle->cycle_minutes) + "," + num(r.cycle->prominence) + "," +
               std::to_string(r.optimal_dt_min) + "," + (r.cycle->low_confidence ? "true" : "false") + ",ok\n";
    std::string pg = "freq_cpm,power\n";
    for (std::size_t k = 0; k < r.periodogram->frequencies.size(); ++k) {
      pg += num(r.periodogram->frequencies[k]) + "," + num(r.periodogram->power[k]) + "\n";
    }
    out.push_back({"spectrum_" + r.evaporator + ".csv", std::move(pg)});
    if (svg) {
      Line ln;
      for (std::size_t k = 0; k < r.periodogram->frequencies.size(); ++k) {
        ln.x.push_back(r.periodogram->frequencies[k]);
        ln.y.push_back(std::log10(std::max(r.periodogram->power[k], 1e-300)));
      }
      out.push_back({"spectrum_" + r.evaporator + ".svg",
                     svg_chart("Periodogram " + r.evaporator, "frequency (cycles/min)", "log10 power", {ln})});
    }
  }
  out.insert(out.begin(), OutputFile{"spectrum_summary.csv", std::move(summary)});
  return out;
}

Outputs ols_outputs(const ols::FitResult& fit, bool svg) {
  Outputs out;
  out.push_back({"coefficients.csv", coefficient_csv(fit.labels, fit.beta, fit.se, fit.ci95)});
  out.push_back({"acf.csv", acf_csv(fit.diagnostics)});
  if (svg) out.push_back({"acf.svg", acf_svg(fit.diagnostics, "OLS residual ACF")});
  return out;
}

Outputs armax_outputs(const armax::ArmaxFit& fit, const armax::ArmaxSpec& spec, bool svg) {
  Outputs out;
  out.push_back({"coefficients.csv", coefficient_csv(fit.labels, fit.beta, fit.se, fit.ci95)});
  out.push_back({"acf.csv", acf_csv(fit.diagnostics)});
  std::string header;
  std::string row;
  for (std::size_t k = 0; k < spec.p; ++k) {
    header += "phi_" + std::to_string(k + 1) + ",";
    row += num(fit.phi[k]) + ",";
  }
  for (std::size_t k = 0; k < spec.q; ++k) {
    header += "theta_" + std::to_string(k + 1) + ",";
    row += num(fit.theta[k]) + ",";
  }
  header += "sigma2,loglik,aic,ljung_box_p,converged\n";
  row += num(fit.sigma2) + "," + num(fit.loglik) + "," + num(fit.aic) + "," + num(fit.diagnostics.ljung_box_p) + "," +
         (fit.converged ? "true" : "false") + "\n";
  out.push_back({"model.csv", header + row});
  if (svg) out.push_back({"acf.svg", acf_svg(fit.diagnostics, "ARMAX innovation ACF")});
  return out;
}

SweepReport run_sweep(const RunConfig& cfg, const PlantDataset& ds, const thermo::SaturationTable& table) {
  cfg.validate_sweep();
  if (cfg.models.empty()) throw DataError("no model selected");
  if (!cfg.vs_m3) throw DataError("stroke volume unknown: pass --vs or run estimate-vs first");
  const design::SystemConstants consts{*cfg.vs_m3, cfg.eta_vol};
  consts.validate();
  if (cfg.models.end() != std::find(cfg.models.begin(), cfg.models.end(), Model::Armax)) cfg.armax.validate();

  SweepReport report;
  for (const auto& e : ds.evaporators) report.evaporators.push_back(e.id);
  const std::size_t nv = report.evaporators.size();
  const std::size_t nm = cfg.models.size();
  const std::size_t ns = cfg.sweep.size();
  report.points.resize(nm * ns * nv);

  // One task per (model, sampling time); each writes its own block of rows.
  parallel_for(nm * ns, cfg.jobs, [&](std::size_t task) {
    const std::size_t mi = task / ns;
    const std::size_t si = task % ns;
    const Model model = cfg.models[mi];
    const int dt = cfg.sweep[si];
    SweepPoint* block = &report.points[task * nv];
    for (std::size_t i = 0; i < nv; ++i) {
      block[i].dt_min = dt;
      block[i].model = model;
      block[i].evaporator = report.evaporators[i];
    }
    try {
      const auto problem = design::build_problem(resample_to(ds, dt), consts, table);
      Eigen::VectorXd beta;
      std::vector<ols::Interval> ci;
      double lb_p = 0.0;
      if (model == Model::Ols) {
        const auto fit = ols::fit_ols(problem);
        beta = fit.beta;
        ci = fit.ci95;
        lb_p = fit.diagnostics.ljung_box_p;
      } else {
        const auto fit = armax::fit_armax(problem, cfg.armax);
        beta = fit.beta;
        ci = fit.ci95;
        lb_p = fit.diagnostics.ljung_box_p;
      }
      for (std::size_t i = 0; i < nv; ++i) {
        block[i].beta = beta(static_cast<Eigen::Index>(i));
        block[i].ci_lo = ci[i].lo;
        block[i].ci_hi = ci[i].hi;
        block[i].ljung_box_p = lb_p;
      }
    } catch (const Error& e) {
      for (std::size_t i = 0; i < nv; ++i) block[i].error = e.what();
    }
  });
  report.spectrum = spectrum_analysis(ds, table, cfg.jobs);
  return report;
}

Outputs sweep_outputs(const SweepReport& report, bool svg) {
  Outputs out;
  std::map<std::pair<Model, std::string>, std::vector<const SweepPoint*>> curves;
  std::vector<std::pair<Model, std::string>> order;
  for (const auto& p : report.points) {
    const auto key = std::make_pair(p.model, p.evaporator);
    if (!curves.count(key)) order.push_back(key);
    curves[key].push_back(&p);
  }
  for (const auto& key : order) {
    auto pts = curves[key];
    std::stable_sort(pts.begin(), pts.end(), [](const SweepPoint* a, const SweepPoint* b) { return a->dt_min < b->dt_min; });
    std::string text = "dt_min,beta,ci_lo,ci_hi,ljung_box_p,status\n";
    Line ln;
    ln.markers = true;
    std::vector<double> lo;
    std::vector<double> hi;
    for (const auto* p : pts) {
      if (p->error.empty()) {
        text += std::to_string(p->dt_min) + "," + num(p->beta) + "," + num(p->ci_lo) + "," + num(p->ci_hi) + "," +
                num(p->ljung_box_p) + ",ok\n";
        ln.x.push_back(p->dt_min);
        ln.y.push_back(p->beta);
        lo.push_back(p->ci_lo);
        hi.push_back(p->ci_hi);
      } else {
        text += std::to_string(p->dt_min) + ",,,,," + csv::escape("error: " + p->error) + "\n";
      }
    }
    const std::string stem = "sweep_" + to_string(key.first) + "_" + key.second;
    out.push_back({stem + ".csv", std::move(text)});
    if (svg) {
      const auto x = ln.x;
      out.push_back({stem + ".svg", svg_chart("Valve constant " + key.second + " (" + to_string(key.first) + ")",
                                              "sampling time (min)", "estimate (catalog units)", {ln},
                                              std::make_pair(lo, hi), x)});
    }
  }
  auto spec = spectrum_outputs(report.spectrum, svg);
  out.insert(out.end(), spec.begin(), spec.end());
  return out;
}

Outputs search_outputs(const vs::SearchReport& report, const ValveCatalog& catalog) {
  Outputs out;
  out.push_back({"valve_sets.csv", vs::search_csv(report, catalog)});
  if (!report.warnings.empty()) {
    std::string w;
    for (const auto& s : report.warnings) w += s + "\n";
    out.push_back({"warnings.txt", w});
  }
  return out;
}

std::string report_markdown(const RunConfig& cfg, const SweepReport& report) {
  std::string md = "# Valve constant report\n\n";
  md += "Dataset: `" + cfg.dataset.filename().string() + "`\n\n";
  md += "Stroke volume: " + (cfg.vs_m3 ? num(*cfg.vs_m3) + " m3" : std::string("unknown")) +
        ", volumetric efficiency " + num(cfg.eta_vol) + "\n\n";
  md += "## Dominant cycles\n\n| evaporator | cycle (min) | prominence | suggested dt (min) |\n|---|---|---|---|\n";
  std::map<std::string, int> best_dt;
  for (const auto& r : report.spectrum) {
    if (!r.error.empty()) {
      md += "| " + r.evaporator + " | error: " + r.error + " | | |\n";
      continue;
    }
    best_dt[r.evaporator] = r.optimal_dt_min;
    md += "| " + r.evaporator + " | " + csv::format_fixed(r.cycle->cycle_minutes, 2) + " | " +
          csv::format_fixed(r.cycle->prominence, 1) + (r.cycle->low_confidence ? " (low)" : "") + " | " +
          std::to_string(r.optimal_dt_min) + " |\n";
  }
  for (const Model m : cfg.models) {
    md += "\n## " + std::string(m == Model::Ols ? "OLS" : "ARMAX") + " estimates at the suggested sampling time\n\n";
    md += "| evaporator | dt (min) | estimate | 95 % CI | Ljung-Box p |\n|---|---|---|---|---|\n";
    for (const auto& id : report.evaporators) {
      const SweepPoint* chosen = nullptr;
      const int want = best_dt.count(id) ? best_dt[id] : 0;
      for (const auto& p : report.points) {
        if (p.model != m || p.evaporator != id || !p.error.empty()) continue;
        if (!chosen || std::abs(p.dt_min - want) < std::abs(chosen->dt_min - want)) chosen = &p;
      }
      if (!chosen) {
        md += "| " + id + " | | no successful fit | | |\n";
        continue;
      }
      md += "| " + id + " | " + std::to_string(chosen->dt_min) + " | " + csv::format_fixed(chosen->beta, 5) + " | [" +
            csv::format_fixed(chosen->ci_lo, 5) + ", " + csv::format_fixed(chosen->ci_hi, 5) + "] | " +
            csv::format_fixed(chosen->ljung_box_p, 3) + " |\n";
    }
  }
  return md;
}

}  // namespace valvest::pipeline
