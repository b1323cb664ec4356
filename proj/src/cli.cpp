#include "calib/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "calib/bands.hpp"

namespace calib {
namespace {

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double x = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(x)) {
    throw std::runtime_error("invalid number '" + text + "' in " + what);
  }
  return x;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, key));
  if (out.empty()) throw std::invalid_argument("empty list for " + key);
  return out;
}

bool parse_bool(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw std::invalid_argument("invalid boolean '" + text + "' for " + key);
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char c;
  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(record);
    record.clear();
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted field in CSV");
  if (field_started || !record.empty()) end_record();
  if (records.empty()) throw std::runtime_error("CSV input is empty");
  CsvTable t;
  t.header = records.front();
  for (auto& h : t.header) h = trim(h);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw std::runtime_error("CSV row " + std::to_string(r) + " has " +
                               std::to_string(records[r].size()) + " fields, expected " +
                               std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

void parse_dispersion(const std::string& text, RunConfig& cfg) {
  if (text == "pearson") {
    cfg.dispersion = DispersionMode::Pearson;
  } else if (text == "deviance") {
    cfg.dispersion = DispersionMode::Deviance;
  } else if (text == "mle-ig") {
    cfg.dispersion = DispersionMode::MleIg;
  } else if (text.rfind("fixed:", 0) == 0) {
    cfg.dispersion = DispersionMode::Fixed;
    cfg.phi = parse_number(text.substr(6), "dispersion");
    if (!(cfg.phi > 0.0)) throw std::invalid_argument("fixed dispersion must be positive");
  } else {
    throw std::invalid_argument("unknown dispersion '" + text + "'");
  }
}

BandRun run_band(const CsvTable& table, const RunConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const int cy = table.column("y");
  const int cv = table.column("v");
  const int cm = table.column("mu_hat");
  const int cr = table.column("rank");
  if (cy < 0) throw std::runtime_error("CSV needs a 'y' column");
  if (cm < 0) throw std::runtime_error("CSV needs a 'mu_hat' column");
  if (table.rows.empty()) throw std::runtime_error("CSV has no data rows");
  const std::size_t n = table.rows.size();
  std::vector<DispersedObs> obs(n);
  std::vector<double> mu(n), rank(n), y(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const std::string where = "row " + std::to_string(i + 1);
    y[i] = parse_number(row[static_cast<std::size_t>(cy)], where);
    v[i] = cv >= 0 ? parse_number(row[static_cast<std::size_t>(cv)], where) : 1.0;
    mu[i] = parse_number(row[static_cast<std::size_t>(cm)], where);
    rank[i] = cr >= 0 ? parse_number(row[static_cast<std::size_t>(cr)], where) : mu[i];
    obs[i] = {y[i], v[i]};
  }
  const EdfFamily fam = EdfFamily::of(cfg.family);
  for (std::size_t i = 0; i < n; ++i) {
    if (!fam.in_mean_space(mu[i])) {
      throw std::runtime_error("mu_hat outside the mean space at row " + std::to_string(i + 1));
    }
  }

  BandRun run;
  switch (cfg.dispersion) {
    case DispersionMode::Fixed:
      run.phi = cfg.phi;
      break;
    case DispersionMode::Pearson:
      run.phi = pearson_dispersion(fam, y, mu, v, cfg.q);
      break;
    case DispersionMode::Deviance:
      run.phi = deviance_dispersion(fam, y, mu, v, cfg.q);
      break;
    case DispersionMode::MleIg:
      if (cfg.family != Family::InverseGaussian) {
        throw std::invalid_argument("mle-ig dispersion requires the inverse-gaussian family");
      }
      run.phi = mle_dispersion_ig(y, mu, v);
      break;
  }
  if (!(run.phi > 0.0) || !std::isfinite(run.phi)) {
    throw std::runtime_error("estimated dispersion is not positive");
  }

  const RankedSample sorted = make_ranked_sample(obs, rank, run.phi, fam);
  std::vector<double> est(n);
  for (std::size_t i = 0; i < n; ++i) est[i] = mu[sorted.source[i]];

  // Records to test and the sample the band is built on.
  std::vector<BandRecord> records;
  RankedSample base = sorted;
  std::vector<double> base_est = est;
  if (cfg.bins) {
    const BinnedSample b = quantile_bin(sorted, est, *cfg.bins);
    std::vector<DispersedObs> bo;
    for (std::size_t l = 0; l < b.size(); ++l) {
      bo.push_back({b.y_tilde[l], b.v_tilde[l]});
      records.push_back({b.rank_tilde[l], b.y_tilde[l], b.v_tilde[l], b.mu_tilde[l], 0, 0, true});
    }
    base = make_ranked_sample(bo, b.rank_tilde, run.phi, fam);
    base_est = b.mu_tilde;
    run.binned = true;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back({sorted.rank_values[i], sorted.obs[i].y, sorted.obs[i].v, est[i], 0, 0, true});
    }
  }

  const auto [strategy, param] = parse_pair_strategy(cfg.pairs);
  if (strategy == PairStrategy::Distinct && base.has_ties()) {
    // Merge tied rankings; estimates follow as volume-weighted means.
    std::vector<double> merged_est;
    std::size_t g = 0;
    while (g < base.size()) {
      std::size_t e = g;
      double s = 0.0, w = 0.0;
      while (e < base.size() && base.rank_values[e] == base.rank_values[g]) {
        s += base.obs[e].v * base_est[e];
        w += base.obs[e].v;
        ++e;
      }
      merged_est.push_back(s / w);
      g = e;
    }
    base = merge_ties(base);
    base_est = merged_est;
  }
  const PairSet pairs = make_pair_set(strategy, param, base, base_est);
  Band band = build_band(base, pairs, cfg.alpha);
  run.delta = band.delta;
  run.pair_count = pairs.size;
  run.crossed = band.crossed;
  if (cfg.repair) {
    band = repair_crossings(band, base);
    run.repaired = true;
  }

  std::vector<double> r_est, r_rank;
  for (auto& rec : records) {
    const auto [lo, hi] = band_at_rank(band, rec.rank);
    rec.lower = lo;
    rec.upper = hi;
    rec.inside = rec.mu_hat >= lo && rec.mu_hat <= hi;
    r_est.push_back(rec.mu_hat);
    r_rank.push_back(rec.rank);
  }
  run.calibration = test_calibration(band, r_est, r_rank);
  if (cfg.eps) run.epsilon = test_epsilon(band, r_est, r_rank, *cfg.eps);
  run.records = std::move(records);
  return run;
}

void write_band_csv(std::ostream& out, const std::vector<BandRecord>& records) {
  out << "rank,y,v,mu_hat,lower,upper,inside\n";
  for (const auto& r : records) {
    out << fmt(r.rank) << ',' << fmt(r.y) << ',' << fmt(r.v) << ',' << fmt(r.mu_hat) << ','
        << fmt(r.lower) << ',' << fmt(r.upper) << ',' << (r.inside ? 1 : 0) << '\n';
  }
}

std::string render_plot(const std::vector<BandRecord>& records, bool log_scale) {
  if (records.empty()) throw std::invalid_argument("nothing to plot");
  std::vector<BandRecord> rec = records;
  std::stable_sort(rec.begin(), rec.end(),
                   [](const BandRecord& a, const BandRecord& b) { return a.rank < b.rank; });

  auto tx = [&](double x) { return log_scale ? std::log10(x) : x; };
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& r : rec) {
    if (log_scale && !(r.rank > 0.0 && r.mu_hat > 0.0)) {
      throw std::invalid_argument("log scale needs positive ranks and estimates");
    }
    xmin = std::min(xmin, tx(r.rank));
    xmax = std::max(xmax, tx(r.rank));
    for (double yv : {r.mu_hat, r.lower, r.upper}) {
      if (!std::isfinite(yv) || (log_scale && !(yv > 0.0))) continue;
      ymin = std::min(ymin, tx(yv));
      ymax = std::max(ymax, tx(yv));
    }
  }
  if (xmax <= xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax <= ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double W = 800, H = 500, ml = 80, mr = 20, mt = 20, mb = 60;
  auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * (W - ml - mr); };
  // Non-finite or non-positive edges are pinned to the plot frame.
  auto py = [&](double yv) {
    double t;
    if (std::isnan(yv)) {
      t = ymin;
    } else if (std::isinf(yv)) {
      t = yv > 0 ? ymax : ymin;
    } else if (log_scale && !(yv > 0.0)) {
      t = ymin;
    } else {
      t = std::clamp(tx(yv), ymin, ymax);
    }
    return H - mb - (t - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return std::string(buf);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  s << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\" font-family=\"sans-serif\" "
       "font-size=\"11\">\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
    << "\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
    << "\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double fy = ymin + (ymax - ymin) * k / 4.0;
    const double vx = log_scale ? std::pow(10.0, fx) : fx;
    const double vy = log_scale ? std::pow(10.0, fy) : fy;
    const double X = ml + (W - ml - mr) * k / 4.0;
    const double Y = H - mb - (H - mt - mb) * k / 4.0;
    s << "<line x1=\"" << num(X) << "\" y1=\"" << H - mb << "\" x2=\"" << num(X) << "\" y2=\""
      << H - mb + 5 << "\"/>\n";
    s << "<text x=\"" << num(X) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\" "
         "stroke=\"none\">"
      << fmt_short(vx) << "</text>\n";
    s << "<line x1=\"" << ml - 5 << "\" y1=\"" << num(Y) << "\" x2=\"" << ml << "\" y2=\""
      << num(Y) << "\"/>\n";
    s << "<text x=\"" << ml - 8 << "\" y=\"" << num(Y + 4) << "\" text-anchor=\"end\" "
         "stroke=\"none\">"
      << fmt_short(vy) << "</text>\n";
  }
  s << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\" stroke=\"none\">ranking value" << (log_scale ? " (log)" : "")
    << "</text>\n";
  s << "<text x=\"18\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" stroke=\"none\" "
       "transform=\"rotate(-90 18 "
    << (mt + H - mb) / 2 << ")\">mean" << (log_scale ? " (log)" : "") << "</text>\n";
  s << "</g>\n";

  // Step lines: value i holds from rank_i up to rank_{i+1}.
  auto steps = [&](bool upper) {
    std::string pts;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const double e = upper ? rec[i].upper : rec[i].lower;
      const double x0 = px(rec[i].rank);
      const double x1 = i + 1 < rec.size() ? px(rec[i + 1].rank) : x0;
      pts += num(x0) + ',' + num(py(e)) + ' ' + num(x1) + ',' + num(py(e)) + ' ';
    }
    if (!pts.empty()) pts.pop_back();
    return pts;
  };
  s << "<g id=\"band\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\">\n";
  s << "<polyline class=\"lower\" points=\"" << steps(false) << "\"/>\n";
  s << "<polyline class=\"upper\" points=\"" << steps(true) << "\"/>\n";
  s << "</g>\n";
  s << "<g id=\"estimates\">\n";
  for (const auto& r : rec) {
    if (r.inside) {
      s << "<circle class=\"inside\" cx=\"" << num(px(r.rank)) << "\" cy=\"" << num(py(r.mu_hat))
        << "\" r=\"2\" fill=\"black\"/>\n";
    } else {
      s << "<circle class=\"outside\" cx=\"" << num(px(r.rank)) << "\" cy=\"" << num(py(r.mu_hat))
        << "\" r=\"3.5\" fill=\"#2ca02c\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    }
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

void emit_plot(const std::vector<BandRecord>& records, const std::string& path, bool log_scale) {
  const std::string svg = render_plot(records, log_scale);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write plot to '" + path + "'");
  f << svg;
  if (!f) throw std::runtime_error("failed writing plot to '" + path + "'");
}

std::vector<Metric> run_simulate(const std::string& preset,
                                 const std::map<std::string, std::string>& overrides, int reps,
                                 std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("reps must be positive");
  auto as_int = [](const std::string& v, const std::string& k) {
    const double x = parse_number(v, k);
    if (x != std::floor(x) || x < 1) throw std::invalid_argument(k + " must be a positive integer");
    return static_cast<int>(x);
  };
  auto unknown = [&](const std::string& k) {
    return std::invalid_argument("unknown override '" + k + "' for preset " + preset);
  };
  if (preset == "example1") {
    Example1Config c;
    c.reps = reps;
    for (const auto& [k, v] : overrides) {
      if (k == "n") c.n = as_int(v, k);
      else if (k == "alpha") c.alpha = parse_number(v, k);
      else if (k == "alphas") c.alphas = parse_list(v, k);
      else if (k == "nbh") c.nbh = parse_list(v, k);
      else if (k == "dist") c.dist = parse_list(v, k);
      else if (k == "bins") c.bins = parse_list(v, k);
      else throw unknown(k);
    }
    return run_example1(c, seed);
  }
  if (preset == "example3") {
    Example3Config c;
    c.reps = reps;
    for (const auto& [k, v] : overrides) {
      if (k == "n") c.n = as_int(v, k);
      else if (k == "alpha") c.alpha = parse_number(v, k);
      else if (k == "phi") c.phi = parse_number(v, k);
      else if (k == "mean_lo") c.mean_lo = parse_number(v, k);
      else if (k == "mean_hi") c.mean_hi = parse_number(v, k);
      else throw unknown(k);
    }
    if (!(c.phi > 0.0)) throw std::invalid_argument("phi must be positive");
    return run_example3(c, seed);
  }
  if (preset == "example5") {
    Example5Config c;
    c.reps = reps;
    for (const auto& [k, v] : overrides) {
      if (k == "n") c.n = as_int(v, k);
      else if (k == "alpha") c.alpha = parse_number(v, k);
      else if (k == "shifts") c.shifts = parse_list(v, k);
      else if (k == "levels") c.levels = parse_list(v, k);
      else if (k == "raw") c.raw = parse_bool(v, k);
      else if (k == "binned") c.binned = parse_bool(v, k);
      else throw unknown(k);
    }
    return run_example5(c, seed);
  }
  throw std::invalid_argument("unknown preset '" + preset + "'");
}

void write_metrics_csv(std::ostream& out, const std::vector<Metric>& metrics) {
  out << "preset,scenario,param,metric,value\n";
  for (const auto& m : metrics) {
    out << m.preset << ',' << m.scenario << ',' << fmt(m.param) << ',' << m.name << ','
        << fmt(m.value) << '\n';
  }
}

}  // namespace calib
