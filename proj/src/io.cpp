#include "copulalab/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace copulalab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& tok, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(tok, &pos);
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos])))
      ++pos;
    return pos == tok.size();
  } catch (...) {
    return false;
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream is(line);
  while (std::getline(is, tok, sep)) out.push_back(trim(tok));
  return out;
}

}  // namespace

Sample read_csv(const std::filesystem::path& path, TiePolicy ties,
                std::uint64_t jitter_seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file: " + path.string());

  std::vector<double> data;
  std::size_t d = 0, lineno = 0;
  std::string line;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto toks = split(t, ',');
    std::vector<double> row;
    row.reserve(toks.size());
    bool numeric = true;
    for (const auto& tok : toks) {
      double v;
      if (!parse_double(tok, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first_content_line) {  // optional header row
        first_content_line = false;
        continue;
      }
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": non-numeric value");
    }
    first_content_line = false;
    if (d == 0) d = row.size();
    if (row.size() != d)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected " + std::to_string(d) + " columns");
    data.insert(data.end(), row.begin(), row.end());
  }
  if (d == 0) throw ConfigError(path.string() + ": no data rows");

  const std::size_t n = data.size() / d;
  Sample s(std::move(data), n, d, SampleKind::Raw);
  try {
    s.ensure_caches();
  } catch (const TieError&) {
    if (ties != TiePolicy::Jitter) throw;
    s = jitter_ties(s, jitter_seed);
  }
  return s;
}

void write_csv(const std::filesystem::path& path, const Sample& s) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path.string());
  out << std::setprecision(17);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.dimension(); ++j)
      out << (j ? "," : "") << s(i, j);
    out << "\n";
  }
}

IniConfig IniConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_string(os.str());
}

IniConfig IniConfig::parse_string(const std::string& text) {
  IniConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    const auto hash = t.find('#');
    if (hash != std::string::npos) t = trim(t.substr(0, hash));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg.values_[section][key] = value;
  }
  return cfg;
}

bool IniConfig::has(const std::string& section, const std::string& key) const {
  const auto sit = values_.find(section);
  return sit != values_.end() && sit->second.count(key) > 0;
}

std::string IniConfig::get(const std::string& section,
                           const std::string& key) const {
  if (!has(section, key))
    throw ConfigError("missing config key [" + section + "] " + key);
  return values_.at(section).at(key);
}

std::string IniConfig::get_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double IniConfig::get_double(const std::string& section,
                             const std::string& key) const {
  double v;
  if (!parse_double(get(section, key), v))
    throw ConfigError("config key [" + section + "] " + key +
                      " is not a number");
  return v;
}

long long IniConfig::get_int(const std::string& section,
                             const std::string& key) const {
  const double v = get_double(section, key);
  const long long i = static_cast<long long>(std::llround(v));
  if (static_cast<double>(i) != v)
    throw ConfigError("config key [" + section + "] " + key +
                      " is not an integer");
  return i;
}

std::vector<double> IniConfig::get_list(const std::string& section,
                                        const std::string& key) const {
  std::vector<double> out;
  for (const auto& tok : split(get(section, key), ',')) {
    double v;
    if (!parse_double(tok, v))
      throw ConfigError("config key [" + section + "] " + key +
                        " has a non-numeric entry");
    out.push_back(v);
  }
  return out;
}

namespace {

struct ChartFrame {
  double x0 = 70, y0 = 30, w = 520, h = 360;  // plot box in px
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void expand_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series, bool log_log) {
  ChartFrame f;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double x = s.x[i], y = s.y[i];
      if (log_log) {
        if (!(x > 0.0) || !(y > 0.0)) continue;
        x = std::log10(x);
        y = std::log10(y);
      }
      if (!any) {
        f.xmin = f.xmax = x;
        f.ymin = f.ymax = y;
        any = true;
      }
      f.xmin = std::fmin(f.xmin, x);
      f.xmax = std::fmax(f.xmax, x);
      f.ymin = std::fmin(f.ymin, y);
      f.ymax = std::fmax(f.ymax, y);
    }
  }
  expand_range(f.xmin, f.xmax);
  expand_range(f.ymin, f.ymax);

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"460\" "
        "viewBox=\"0 0 640 460\">\n";
  os << "<rect width=\"640\" height=\"460\" fill=\"white\"/>\n";
  os << "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << title << "</text>\n";
  os << "<rect x=\"" << f.x0 << "\" y=\"" << f.y0 << "\" width=\"" << f.w
     << "\" height=\"" << f.h << "\" fill=\"none\" stroke=\"black\"/>\n";
  // axis ticks (4 per axis)
  for (int t = 0; t <= 4; ++t) {
    const double fx = f.xmin + (f.xmax - f.xmin) * t / 4.0;
    const double fy = f.ymin + (f.ymax - f.ymin) * t / 4.0;
    os << "<text x=\"" << f.px(fx) << "\" y=\"" << f.y0 + f.h + 18
       << "\" text-anchor=\"middle\" font-size=\"10\">"
       << fmt(log_log ? std::pow(10.0, fx) : fx) << "</text>\n";
    os << "<text x=\"" << f.x0 - 8 << "\" y=\"" << f.py(fy) + 4
       << "\" text-anchor=\"end\" font-size=\"10\">"
       << fmt(log_log ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  os << "<text x=\"" << f.x0 + f.w / 2 << "\" y=\"452\" text-anchor=\"middle\" "
        "font-size=\"12\">"
     << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << f.y0 + f.h / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << f.y0 + f.h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double x = s.x[i], y = s.y[i];
      if (log_log) {
        if (!(x > 0.0) || !(y > 0.0)) continue;
        x = std::log10(x);
        y = std::log10(y);
      }
      pts << f.px(x) << "," << f.py(y) << " ";
    }
    const char* color = colors[si % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    os << "<text x=\"" << f.x0 + f.w - 6 << "\" y=\""
       << f.y0 + 16 + 14 * static_cast<double>(si)
       << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">"
       << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_qq_plot(const std::string& title, std::vector<double> a,
                        std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t m = std::min(a.size(), b.size());
  SvgSeries qq{"quantiles", {}, {}};
  for (std::size_t i = 0; i < m; ++i) {
    const double q = (i + 0.5) / m;
    qq.x.push_back(a[static_cast<std::size_t>(q * a.size())]);
    qq.y.push_back(b[static_cast<std::size_t>(q * b.size())]);
  }
  double lo = std::fmin(qq.x.front(), qq.y.front());
  double hi = std::fmax(qq.x.back(), qq.y.back());
  SvgSeries diag{"y = x", {lo, hi}, {lo, hi}};
  return svg_line_chart(title, "sample 1 quantiles", "sample 2 quantiles",
                        {qq, diag}, false);
}

}  // namespace copulalab
