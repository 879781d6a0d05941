#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "optinit/harness.hpp"

namespace optinit {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string num(double v) { return fmt("%.10g", v); }
std::string exact(double v) { return fmt("%.17g", v); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Fixed palette so plots are byte-stable.
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string render_svg(const std::string& title, const std::vector<const StrategyCurve*>& curves) {
  constexpr double W = 720, H = 440, left = 70, right = 190, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  std::size_t episodes = 0;
  double lo = 0.0, hi = 0.0;
  for (const auto* c : curves) {
    episodes = std::max(episodes, c->rows.size());
    for (const auto& r : c->rows) {
      lo = std::min(lo, r.window_mean);
      hi = std::max(hi, r.window_mean);
    }
  }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  const double span_x = episodes > 1 ? static_cast<double>(episodes - 1) : 1.0;
  auto px = [&](double e) { return left + pw * e / span_x; };
  auto py = [&](double v) { return top + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << num(py(v) + 4)
        << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
    const double e = span_x * i / 4.0;
    svg << "<text x=\"" << num(px(e)) << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\">" << num(std::round(e)) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\">episode</text>\n";
  svg << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\" text-anchor=\"middle\">sliding-window mean score</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : curves[i]->rows) {
      svg << num(px(static_cast<double>(r.episode))) << ',' << num(py(r.window_mean)) << ' ';
    }
    svg << "\"/>\n";
    const double ly = top + 16 + 20.0 * static_cast<double>(i);
    svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">"
        << to_string(curves[i]->strategy) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string format_alpha(double alpha) { return fmt("%g", alpha); }

std::vector<double> sliding_window_curve(const std::vector<double>& scores, std::size_t window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  std::vector<double> out(scores.size());
  for (std::size_t e = 0; e < scores.size(); ++e) {
    const std::size_t first = e + 1 >= window ? e + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t i = first; i <= e; ++i) sum += scores[i];
    out[e] = sum / static_cast<double>(e - first + 1);
  }
  return out;
}

std::size_t first_score_episode(const std::vector<double>& scores) {
  double cumulative = 0.0;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    cumulative += scores[e];
    if (cumulative != 0.0) return e;
  }
  return scores.size();
}

std::pair<double, double> mean_and_std_error(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double pivot = xs.front();
  const double n = static_cast<double>(xs.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double x : xs) {
    sum += x - pivot;
    sum_sq += (x - pivot) * (x - pivot);
  }
  const double mean = pivot + sum / n;
  if (xs.size() < 2) return {mean, 0.0};
  const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

std::vector<StrategyCurve> aggregate(const std::vector<RunRecord>& records,
                                     const ExperimentSpec& spec) {
  std::vector<StrategyCurve> curves;
  for (InitStrategy s : spec.strategies) {
    for (double alpha : spec.alphas) {
      std::vector<const RunRecord*> cell;
      for (const RunRecord& r : records) {
        if (r.strategy == s && r.alpha == alpha) cell.push_back(&r);
      }
      if (cell.size() != spec.n_runs) {
        throw std::invalid_argument("record set for " + std::string(to_string(s)) + " alpha " +
                                    format_alpha(alpha) + " has " + std::to_string(cell.size()) +
                                    " runs, expected " + std::to_string(spec.n_runs));
      }
      std::sort(cell.begin(), cell.end(),
                [](const RunRecord* a, const RunRecord* b) { return a->run < b->run; });

      std::vector<std::vector<double>> smoothed;
      std::vector<double> firsts;
      for (const RunRecord* r : cell) {
        if (r->scores.size() != spec.episodes) {
          throw std::invalid_argument("run record has the wrong number of episodes");
        }
        smoothed.push_back(sliding_window_curve(r->scores, spec.window));
        firsts.push_back(static_cast<double>(first_score_episode(r->scores)));
      }

      StrategyCurve curve{s, alpha, {}, median(firsts)};
      std::vector<double> column(cell.size()), window_column(cell.size());
      for (std::size_t e = 0; e < spec.episodes; ++e) {
        for (std::size_t i = 0; i < cell.size(); ++i) {
          column[i] = cell[i]->scores[e];
          window_column[i] = smoothed[i][e];
        }
        const auto [m, se] = mean_and_std_error(column);
        const auto [wm, wse] = mean_and_std_error(window_column);
        curve.rows.push_back(CurveRow{e, m, se, wm, wse});
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

std::vector<std::filesystem::path> emit_reports(const std::vector<RunRecord>& records,
                                                const ExperimentSpec& spec) {
  const std::vector<StrategyCurve> curves = aggregate(records, spec);
  const std::string env = env_id(spec.env);
  std::filesystem::create_directories(spec.output_dir);
  std::vector<std::filesystem::path> written;

  for (const StrategyCurve& c : curves) {
    const auto path = spec.output_dir / ("curve_" + env + "_" + std::string(to_string(c.strategy)) +
                                         "_alpha" + format_alpha(c.alpha) + ".csv");
    auto out = open_out(path);
    out << "episode,mean_score,std_error,window_mean,window_std_error\n";
    for (const CurveRow& r : c.rows) {
      out << r.episode << ',' << num(r.mean_score) << ',' << num(r.std_error) << ','
          << num(r.window_mean) << ',' << num(r.window_std_error) << '\n';
    }
    written.push_back(path);
  }

  {
    const auto path = spec.output_dir / "summary.csv";
    auto out = open_out(path);
    out << "env,strategy,alpha,runs,median_first_score_episode,final_window_mean,"
           "final_window_std_error\n";
    for (const StrategyCurve& c : curves) {
      const CurveRow& last = c.rows.back();
      out << env << ',' << to_string(c.strategy) << ',' << format_alpha(c.alpha) << ','
          << spec.n_runs << ',' << num(c.median_first_score_episode) << ','
          << num(last.window_mean) << ',' << num(last.window_std_error) << '\n';
    }
    written.push_back(path);
  }

  for (double alpha : spec.alphas) {
    std::vector<const StrategyCurve*> panel;
    for (const StrategyCurve& c : curves) {
      if (c.alpha == alpha) panel.push_back(&c);
    }
    const auto path = spec.output_dir / ("plot_" + env + "_alpha" + format_alpha(alpha) + ".svg");
    auto out = open_out(path);
    out << render_svg(env + ", alpha = " + format_alpha(alpha) + ", " +
                          std::to_string(spec.n_runs) + " runs, window " +
                          std::to_string(spec.window),
                      panel);
    written.push_back(path);
  }
  return written;
}

void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "strategy,alpha,run,seed,episode,score\n";
  for (const RunRecord& r : records) {
    for (std::size_t e = 0; e < r.scores.size(); ++e) {
      out << to_string(r.strategy) << ',' << exact(r.alpha) << ',' << r.run << ',' << r.seed
          << ',' << e << ',' << exact(r.scores[e]) << '\n';
    }
  }
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "strategy,alpha,run,seed,episode,score") {
    throw std::invalid_argument(path.string() + " is not a records file");
  }

  std::vector<RunRecord> records;
  std::map<std::tuple<InitStrategy, double, std::size_t>, std::size_t> slot;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string strategy, alpha, run, seed, episode, score;
    if (!std::getline(row, strategy, ',') || !std::getline(row, alpha, ',') ||
        !std::getline(row, run, ',') || !std::getline(row, seed, ',') ||
        !std::getline(row, episode, ',') || !std::getline(row, score)) {
      throw std::invalid_argument("malformed records row: " + line);
    }
    const InitStrategy s = parse_init_strategy(strategy);
    const double a = std::stod(alpha);
    const std::size_t r = std::stoull(run);
    auto [it, inserted] = slot.try_emplace({s, a, r}, records.size());
    if (inserted) records.push_back(RunRecord{s, a, r, std::stoull(seed), {}});
    RunRecord& rec = records[it->second];
    if (std::stoull(episode) != rec.scores.size()) {
      throw std::invalid_argument("records rows out of episode order: " + line);
    }
    rec.scores.push_back(std::stod(score));
  }
  return records;
}

}  // namespace optinit
