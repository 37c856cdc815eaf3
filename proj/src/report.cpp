#include "gapprobe/report.hpp"

#include <cstdio>
#include <sstream>

namespace gapprobe::report {

using nlohmann::json;
using metrics::AggregateReport;
using metrics::ComparisonReport;

namespace {

std::string num(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string pct(double v) { return num(100.0 * v, 2) + "%"; }

std::string correction_name(metrics::Correction c) {
  return c == metrics::Correction::Yates ? "yates" : "none";
}

json proportion(const metrics::Proportion& p) {
  return {{"successes", p.successes},
          {"trials", p.trials},
          {"value", p.value},
          {"ci", {p.wilson.lower, p.wilson.upper}}};
}

metrics::Proportion proportion_from(const json& j) {
  metrics::Proportion p;
  p.successes = j.at("successes").get<std::size_t>();
  p.trials = j.at("trials").get<std::size_t>();
  p.value = j.at("value").get<double>();
  p.wilson = {j.at("ci").at(0).get<double>(), j.at("ci").at(1).get<double>()};
  return p;
}

json ttest(const std::optional<metrics::TTest>& t) {
  if (!t) return nullptr;
  return {{"t", t->t}, {"df", t->df}, {"p_one_tailed", t->p_one_tailed},
          {"mean", t->mean}, {"std_error", t->std_error}};
}

std::optional<metrics::TTest> ttest_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return metrics::TTest{j.at("t").get<double>(), j.at("df").get<double>(),
                        j.at("p_one_tailed").get<double>(), j.at("mean").get<double>(),
                        j.at("std_error").get<double>()};
}

json interval(const std::optional<metrics::Interval>& i) {
  if (!i) return nullptr;
  return {i->lower, i->upper};
}

std::optional<metrics::Interval> interval_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return metrics::Interval{j.at(0).get<double>(), j.at(1).get<double>()};
}

std::string ttest_line(const char* name, const std::optional<metrics::TTest>& t) {
  if (!t) return std::string(name) + ": n/a\n";
  return std::string(name) + ": t(" + num(t->df, 0) + ") = " + num(t->t, 4) +
         ", p = " + num(t->p_one_tailed, 4) + " (one-tailed)\n";
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string to_text(const AggregateReport& r) {
  std::string out;
  out += "dataset: " + (r.label.empty() ? std::string("(unnamed)") : r.label) + "\n";
  out += "items: " + std::to_string(r.n_items) + "\n";
  if (r.n_items == 0) return out;
  auto acc = [](const char* name, const metrics::Proportion& p) {
    return std::string(name) + ": " + pct(p.value) + " (" + std::to_string(p.successes) + "/" +
           std::to_string(p.trials) + "), 95% CI [" + pct(p.wilson.lower) + ", " +
           pct(p.wilson.upper) + "]\n";
  };
  out += acc("accuracy delta(+filler) > 0", r.acc_delta_plus);
  out += acc("accuracy DiD > 0", r.acc_did);
  out += ttest_line("t-test delta(+filler)", r.t_delta);
  out += ttest_line("t-test DiD", r.t_did);
  out += "mean delta(+filler): " + num(r.mean_delta_plus);
  if (r.mean_delta_plus_ci) {
    out += ", 95% CI [" + num(r.mean_delta_plus_ci->lower, 2) + ", " +
           num(r.mean_delta_plus_ci->upper, 2) + "]";
  }
  out += "\nmean DiD: " + num(r.mean_did);
  if (r.mean_did_ci) {
    out += ", 95% CI [" + num(r.mean_did_ci->lower, 2) + ", " + num(r.mean_did_ci->upper, 2) + "]";
  }
  out += "\n";
  return out;
}

std::string to_text(const ComparisonReport& c) {
  return "chi-square " + c.criterion + " (" + c.label_a + " vs " + c.label_b +
         ", correction " + correction_name(c.chi_square.correction) + "): chi2(" +
         std::to_string(c.chi_square.df) + ") = " + num(c.chi_square.statistic, 4) +
         ", p = " + num(c.chi_square.p, 6) + "  [" + std::to_string(c.a_succ) + "/" +
         std::to_string(c.a_succ + c.a_fail) + " vs " + std::to_string(c.b_succ) + "/" +
         std::to_string(c.b_succ + c.b_fail) + "]\n";
}

json to_record(const AggregateReport& r) {
  json j{{"type", "aggregate"}, {"label", r.label}, {"n_items", r.n_items}};
  if (r.n_items == 0) return j;
  j["acc_delta_plus"] = proportion(r.acc_delta_plus);
  j["acc_did"] = proportion(r.acc_did);
  j["t_delta"] = ttest(r.t_delta);
  j["t_did"] = ttest(r.t_did);
  j["mean_delta_plus"] = r.mean_delta_plus;
  j["mean_delta_plus_ci"] = interval(r.mean_delta_plus_ci);
  j["mean_did"] = r.mean_did;
  j["mean_did_ci"] = interval(r.mean_did_ci);
  return j;
}

json to_record(const ComparisonReport& c) {
  return {{"type", "comparison"},
          {"criterion", c.criterion},
          {"a", c.label_a},
          {"b", c.label_b},
          {"counts", {{c.a_succ, c.a_fail}, {c.b_succ, c.b_fail}}},
          {"chi_square",
           {{"statistic", c.chi_square.statistic},
            {"df", c.chi_square.df},
            {"p", c.chi_square.p},
            {"correction", correction_name(c.chi_square.correction)}}}};
}

AggregateReport aggregate_from_record(const json& j) {
  AggregateReport r;
  r.label = j.value("label", "");
  r.n_items = j.at("n_items").get<std::size_t>();
  if (r.n_items == 0) return r;
  r.acc_delta_plus = proportion_from(j.at("acc_delta_plus"));
  r.acc_did = proportion_from(j.at("acc_did"));
  r.t_delta = ttest_from(j.at("t_delta"));
  r.t_did = ttest_from(j.at("t_did"));
  r.mean_delta_plus = j.at("mean_delta_plus").get<double>();
  r.mean_delta_plus_ci = interval_from(j.at("mean_delta_plus_ci"));
  r.mean_did = j.at("mean_did").get<double>();
  r.mean_did_ci = interval_from(j.at("mean_did_ci"));
  return r;
}

std::vector<AggregateReport> read_aggregates(std::string_view jsonl) {
  std::vector<AggregateReport> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.value("type", "") == "aggregate") out.push_back(aggregate_from_record(j));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedRow, "report line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string render_svg(const std::vector<AggregateReport>& reports) {
  std::vector<const AggregateReport*> shown;
  for (const auto& r : reports) {
    if (r.n_items > 0) shown.push_back(&r);
  }
  if (shown.empty()) throw Error(ErrorKind::NoReports, "no report with scored items");

  const int left = 70, right = 30, top = 50, bottom = 70;
  const int group_w = 160, bar_w = 50, plot_h = 260;
  const int width = left + right + group_w * static_cast<int>(shown.size());
  const int height = top + plot_h + bottom;
  const char* colors[2] = {"#4C72B0", "#DD8452"};
  const char* names[2] = {"Delta(+filler) &gt; 0", "DiD &gt; 0"};
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\" font-family=\"sans-serif\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << "Accuracy by dataset (95% Wilson intervals)</text>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    const std::string y = num(y_of(v), 1);
    s << "<line class=\"grid\" x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - right
      << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << y << "\" text-anchor=\"end\" font-size=\"11\""
      << " dominant-baseline=\"middle\">" << k * 20 << "%</text>\n";
  }
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
    << top + plot_h << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - right
    << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  s << "<text transform=\"translate(18," << top + plot_h / 2 << ") rotate(-90)\""
    << " text-anchor=\"middle\" font-size=\"12\">Accuracy</text>\n";

  for (std::size_t g = 0; g < shown.size(); ++g) {
    const auto& r = *shown[g];
    const int gx = left + group_w * static_cast<int>(g) + (group_w - 2 * bar_w) / 2;
    const metrics::Proportion* props[2] = {&r.acc_delta_plus, &r.acc_did};
    for (int b = 0; b < 2; ++b) {
      const auto& p = *props[b];
      const int x = gx + b * bar_w;
      const double y = y_of(p.value);
      s << "<rect class=\"bar\" x=\"" << x + 4 << "\" y=\"" << num(y, 1) << "\" width=\""
        << bar_w - 8 << "\" height=\"" << num(top + plot_h - y, 1) << "\" fill=\"" << colors[b]
        << "\"><title>" << names[b] << ": " << pct(p.value) << "</title></rect>\n";
      const int cx = x + bar_w / 2;
      const std::string ylo = num(y_of(p.wilson.lower), 1);
      const std::string yhi = num(y_of(p.wilson.upper), 1);
      s << "<g class=\"errorbar\" stroke=\"black\">"
        << "<line x1=\"" << cx << "\" y1=\"" << ylo << "\" x2=\"" << cx << "\" y2=\"" << yhi << "\"/>"
        << "<line x1=\"" << cx - 6 << "\" y1=\"" << ylo << "\" x2=\"" << cx + 6 << "\" y2=\"" << ylo << "\"/>"
        << "<line x1=\"" << cx - 6 << "\" y1=\"" << yhi << "\" x2=\"" << cx + 6 << "\" y2=\"" << yhi << "\"/>"
        << "</g>\n";
      s << "<text x=\"" << cx << "\" y=\"" << num(y_of(p.wilson.upper) - 6, 1)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << num(100.0 * p.value, 1) << "</text>\n";
    }
    s << "<text x=\"" << gx + bar_w << "\" y=\"" << top + plot_h + 18
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(r.label) << "</text>\n";
    s << "<text x=\"" << gx + bar_w << "\" y=\"" << top + plot_h + 34
      << "\" text-anchor=\"middle\" font-size=\"10\">N=" << r.n_items << "</text>\n";
  }
  for (int b = 0; b < 2; ++b) {
    const int lx = left + 10 + b * 150;
    const int ly = height - 18;
    s << "<rect x=\"" << lx << "\" y=\"" << ly - 10 << "\" width=\"12\" height=\"12\" fill=\""
      << colors[b] << "\"/><text x=\"" << lx + 18 << "\" y=\"" << ly << "\" font-size=\"11\">"
      << names[b] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace gapprobe::report
