#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ceorate/finite/bt_bound.hpp"
#include "ceorate/finite/kernel.hpp"
#include "ceorate/finite/pmf.hpp"

namespace ceorate::finite {

/// Raised on malformed system files; the message starts with "name:line:".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finite system together with the code parameters to evaluate it under.
struct ParsedSystem {
  BtSystem system;
  CodeParams params;
};

namespace detail {

inline ParseError parse_err(const std::string& name, int line,
                            const std::string& msg) {
  return ParseError(name + ":" + std::to_string(line) + ": " + msg);
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Splits on whitespace and commas; both are interchangeable separators.
inline std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline bool to_double(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && !tok.empty();
}

inline bool to_int(const std::string& tok, long long& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtoll(begin, &end, 10);
  return end == begin + tok.size() && !tok.empty();
}

/// Axis references read "name@time" or "name@time#observer" (default 0).
inline bool to_axis_ref(const std::string& tok, std::string& name, int& time,
                        int& observer) {
  const std::size_t at = tok.find('@');
  if (at == std::string::npos || at == 0) return false;
  name = tok.substr(0, at);
  std::string rest = tok.substr(at + 1);
  observer = 0;
  const std::size_t hash = rest.find('#');
  if (hash != std::string::npos) {
    long long o = 0;
    if (!to_int(rest.substr(hash + 1), o) || o < 0) return false;
    observer = static_cast<int>(o);
    rest = rest.substr(0, hash);
  }
  long long t = 0;
  if (!to_int(rest, t) || t < 1) return false;
  time = static_cast<int>(t);
  return true;
}

struct SectionLine {
  int number = 0;
  std::string text;
};

struct Section {
  std::string keyword;
  std::string header;  // header text after the keyword, brackets stripped
  int header_line = 0;
  std::vector<SectionLine> lines;
};

/// First pass: strip comments, group lines under their section headers.
inline std::vector<Section> split_sections(const std::string& text,
                                           const std::string& name,
                                           int& eof_line) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::size_t comment = raw.find('#');
    // '#' also appears inside axis references ("u@1#2"); only treat it as a
    // comment opener at line start or after whitespace.
    std::string body = raw;
    std::size_t search = 0;
    while (true) {
      const std::size_t pos = body.find('#', search);
      if (pos == std::string::npos) break;
      if (pos == 0 || std::isspace(static_cast<unsigned char>(body[pos - 1]))) {
        body = body.substr(0, pos);
        break;
      }
      search = pos + 1;
    }
    (void)comment;
    body = trim(body);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') {
        throw parse_err(name, number, "unterminated section header");
      }
      const std::string inner = trim(body.substr(1, body.size() - 2));
      const std::vector<std::string> words = split_tokens(inner);
      if (words.empty()) {
        throw parse_err(name, number, "empty section header");
      }
      Section sec;
      sec.keyword = words[0];
      sec.header = trim(inner.substr(words[0].size()));
      sec.header_line = number;
      sections.push_back(std::move(sec));
    } else {
      if (sections.empty()) {
        throw parse_err(name, number, "content before the first section");
      }
      sections.back().lines.push_back({number, body});
    }
  }
  eof_line = number;
  return sections;
}

/// Splits a data line on its ";" into coordinate and value halves.
inline std::pair<std::vector<std::string>, std::vector<std::string>>
split_row(const SectionLine& line, const std::string& name) {
  const std::size_t semi = line.text.find(';');
  if (semi == std::string::npos) {
    throw parse_err(name, line.number, "expected ';' between coordinates and values");
  }
  return {split_tokens(line.text.substr(0, semi)),
          split_tokens(line.text.substr(semi + 1))};
}

inline int read_coord(const std::string& tok, int card, const std::string& name,
                      int line, const std::string& what) {
  long long v = 0;
  if (!to_int(tok, v) || v < 0 || v >= card) {
    throw parse_err(name, line,
                    what + " coordinate '" + tok + "' out of range [0, " +
                        std::to_string(card) + ")");
  }
  return static_cast<int>(v);
}

/// Finds an axis by reference among the declared ones; -1 when absent.
inline int find_ref(const std::vector<Axis>& axes, const std::string& ax_name,
                    int time, int observer) {
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i].name == ax_name && axes[i].time == time &&
        axes[i].observer == observer) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

/// Parses one [kernel]/[decoder] section into a KernelStep.  `known` holds
/// every axis visible so far (source axes plus earlier targets) and grows by
/// the new target on success.
inline KernelStep parse_step(const Section& sec, std::vector<Axis>& known,
                             bool decoder, const std::string& name) {
  const std::size_t bar = sec.header.find('|');
  const std::string head =
      bar == std::string::npos ? sec.header : sec.header.substr(0, bar);
  const std::vector<std::string> words = split_tokens(head);
  const std::size_t expect = decoder ? 3 : 4;
  if (words.size() != expect) {
    throw parse_err(name, sec.header_line,
                    decoder ? "decoder header needs: name time card | givens"
                            : "kernel header needs: name time observer card | givens");
  }
  KernelStep step;
  step.target.name = words[0];
  long long t = 0;
  long long obs = 0;
  long long card = 0;
  std::size_t w = 1;
  if (!to_int(words[w++], t) || t < 1) {
    throw parse_err(name, sec.header_line, "bad time '" + words[w - 1] + "'");
  }
  if (!decoder) {
    if (!to_int(words[w++], obs) || obs < 1) {
      throw parse_err(name, sec.header_line,
                      "bad observer '" + words[w - 1] + "'");
    }
  }
  if (!to_int(words[w++], card) || card < 2) {
    throw parse_err(name, sec.header_line, "bad cardinality '" + words[w - 1] + "'");
  }
  step.target.time = static_cast<int>(t);
  step.target.observer = static_cast<int>(obs);
  step.target.card = static_cast<int>(card);

  if (bar != std::string::npos) {
    for (const std::string& tok : split_tokens(sec.header.substr(bar + 1))) {
      std::string ax_name;
      int ax_time = 0;
      int ax_obs = 0;
      if (!to_axis_ref(tok, ax_name, ax_time, ax_obs)) {
        throw parse_err(name, sec.header_line,
                        "bad axis reference '" + tok + "' (want name@time#observer)");
      }
      const int idx = find_ref(known, ax_name, ax_time, ax_obs);
      if (idx < 0) {
        throw parse_err(name, sec.header_line, "unknown axis '" + tok + "'");
      }
      step.given.push_back(known[static_cast<std::size_t>(idx)]);
    }
  }
  if (find_ref(known, step.target.name, step.target.time,
               step.target.observer) >= 0) {
    throw parse_err(name, sec.header_line,
                    "target axis '" + step.target.label() + "' already declared");
  }

  std::size_t rows = 1;
  for (const Axis& g : step.given) rows *= static_cast<std::size_t>(g.card);
  const std::size_t width = static_cast<std::size_t>(step.target.card);
  step.table.assign(rows * width, -1.0);  // -1 marks a missing row

  for (const SectionLine& line : sec.lines) {
    auto [coords, probs] = split_row(line, name);
    if (coords.size() != step.given.size()) {
      throw parse_err(name, line.number,
                      "expected " + std::to_string(step.given.size()) +
                          " given coordinates, got " + std::to_string(coords.size()));
    }
    std::size_t row = 0;
    for (std::size_t g = 0; g < coords.size(); ++g) {
      row = row * static_cast<std::size_t>(step.given[g].card) +
            static_cast<std::size_t>(read_coord(coords[g], step.given[g].card,
                                                name, line.number, "given"));
    }
    if (probs.size() != width) {
      throw parse_err(name, line.number,
                      "expected " + std::to_string(width) + " probabilities, got " +
                          std::to_string(probs.size()));
    }
    if (step.table[row * width] >= 0.0) {
      throw parse_err(name, line.number, "duplicate row");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      double p = 0.0;
      if (!to_double(probs[j], p) || p < 0.0) {
        throw parse_err(name, line.number, "bad probability '" + probs[j] + "'");
      }
      step.table[row * width + j] = p;
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw parse_err(name, line.number, "row probabilities sum to " +
                                             std::to_string(sum) + ", want 1");
    }
    for (std::size_t j = 0; j < width; ++j) step.table[row * width + j] /= sum;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (step.table[r * width] < 0.0) {
      throw parse_err(name, sec.header_line,
                      "missing row(s): only " + std::to_string(sec.lines.size()) +
                          " of " + std::to_string(rows) + " given combinations present");
    }
  }
  known.push_back(step.target);
  return step;
}

/// Reads a numeric [params] entry with broadcast: `counts` lists the
/// acceptable value counts in preference order (e.g. {1, t, t*K}).
inline std::vector<double> broadcast_values(const std::vector<std::string>& toks,
                                            std::size_t want, const std::string& key,
                                            const std::string& name, int line) {
  std::vector<double> vals;
  vals.reserve(toks.size());
  for (const std::string& tok : toks) {
    double v = 0.0;
    if (!to_double(tok, v)) {
      throw parse_err(name, line, "bad value '" + tok + "' for " + key);
    }
    vals.push_back(v);
  }
  if (vals.size() == want) return vals;
  if (vals.size() == 1) return std::vector<double>(want, vals[0]);
  throw parse_err(name, line,
                  key + " wants 1 or " + std::to_string(want) + " values, got " +
                      std::to_string(vals.size()));
}

}  // namespace detail

/// Parses a finite system description.  The format is sectioned text:
///
///   [axes]                       # source axes: name time observer card
///   x 1 0 2
///   y 1 1 2
///   [source]                     # joint source pmf: coords ; probability
///   0 0 ; 0.45
///   ...
///   [kernel u 1 1 2 | y@1#1]     # encoder step: given coords ; target pmf
///   0 ; 0.9 0.1
///   1 ; 0.1 0.9
///   [decoder xhat 1 2 | u@1#1]
///   0 ; 1 0
///   1 ; 0 1
///   [distortion]                 # x xhat ; value
///   0 0 ; 0
///   ...
///   [params]                     # scalars broadcast over time/observers
///   d = 0.25
///   L = 2
///   n = 1
///
/// '#' starts a comment when preceded by whitespace.  Probabilities must sum
/// to one within 1e-9 per row (they are renormalized exactly afterwards).
/// Errors carry "name:line:" prefixes.
inline ParsedSystem parse_system(const std::string& text,
                                 const std::string& name = "<input>") {
  int eof_line = 0;
  const std::vector<detail::Section> sections =
      detail::split_sections(text, name, eof_line);

  const detail::Section* axes_sec = nullptr;
  const detail::Section* source_sec = nullptr;
  const detail::Section* distortion_sec = nullptr;
  const detail::Section* params_sec = nullptr;
  std::vector<const detail::Section*> kernel_secs;
  std::vector<const detail::Section*> decoder_secs;
  for (const detail::Section& sec : sections) {
    if (sec.keyword == "axes") {
      axes_sec = &sec;
    } else if (sec.keyword == "source") {
      source_sec = &sec;
    } else if (sec.keyword == "kernel") {
      kernel_secs.push_back(&sec);
    } else if (sec.keyword == "decoder") {
      decoder_secs.push_back(&sec);
    } else if (sec.keyword == "distortion") {
      distortion_sec = &sec;
    } else if (sec.keyword == "params") {
      params_sec = &sec;
    } else {
      throw detail::parse_err(name, sec.header_line,
                              "unknown section [" + sec.keyword + "]");
    }
  }
  auto require = [&](const void* sec, const char* what) {
    if (sec == nullptr) {
      throw detail::parse_err(name, eof_line,
                              std::string("missing [") + what + "] section");
    }
  };
  require(axes_sec, "axes");
  require(source_sec, "source");
  require(distortion_sec, "distortion");
  require(params_sec, "params");
  if (kernel_secs.empty()) {
    throw detail::parse_err(name, eof_line, "missing [kernel] section(s)");
  }
  if (decoder_secs.empty()) {
    throw detail::parse_err(name, eof_line, "missing [decoder] section(s)");
  }

  // --- [axes] ---------------------------------------------------------
  std::vector<Axis> source_axes;
  for (const detail::SectionLine& line : axes_sec->lines) {
    const std::vector<std::string> toks = detail::split_tokens(line.text);
    long long t = 0;
    long long o = 0;
    long long c = 0;
    if (toks.size() != 4 || !detail::to_int(toks[1], t) ||
        !detail::to_int(toks[2], o) || !detail::to_int(toks[3], c) || t < 1 ||
        o < 0 || c < 2) {
      throw detail::parse_err(name, line.number,
                              "axis line needs: name time observer card");
    }
    Axis ax;
    ax.name = toks[0];
    ax.time = static_cast<int>(t);
    ax.observer = static_cast<int>(o);
    ax.card = static_cast<int>(c);
    if (detail::find_ref(source_axes, ax.name, ax.time, ax.observer) >= 0) {
      throw detail::parse_err(name, line.number,
                              "axis '" + ax.label() + "' declared twice");
    }
    source_axes.push_back(std::move(ax));
  }
  if (source_axes.empty()) {
    throw detail::parse_err(name, axes_sec->header_line, "no axes declared");
  }

  // --- [source] -------------------------------------------------------
  std::size_t table_size = 1;
  for (const Axis& ax : source_axes) {
    table_size *= static_cast<std::size_t>(ax.card);
  }
  std::vector<double> probs(table_size, 0.0);
  std::vector<bool> seen(table_size, false);
  for (const detail::SectionLine& line : source_sec->lines) {
    auto [coords, vals] = detail::split_row(line, name);
    if (coords.size() != source_axes.size() || vals.size() != 1) {
      throw detail::parse_err(name, line.number,
                              "source line needs " +
                                  std::to_string(source_axes.size()) +
                                  " coordinates, ';', one probability");
    }
    std::size_t flat = 0;
    for (std::size_t a = 0; a < coords.size(); ++a) {
      flat = flat * static_cast<std::size_t>(source_axes[a].card) +
             static_cast<std::size_t>(detail::read_coord(
                 coords[a], source_axes[a].card, name, line.number, "source"));
    }
    if (seen[flat]) {
      throw detail::parse_err(name, line.number, "duplicate source entry");
    }
    seen[flat] = true;
    double p = 0.0;
    if (!detail::to_double(vals[0], p) || p < 0.0) {
      throw detail::parse_err(name, line.number,
                              "bad probability '" + vals[0] + "'");
    }
    probs[flat] = p;
  }
  long double acc = 0.0L;
  for (double p : probs) acc += p;
  const double total = static_cast<double>(acc);
  if (std::abs(total - 1.0) > 1e-9) {
    throw detail::parse_err(name, source_sec->header_line,
                            "source probabilities sum to " +
                                std::to_string(total) + ", want 1");
  }
  for (double& p : probs) p /= total;

  // --- [kernel] / [decoder] -------------------------------------------
  std::vector<Axis> known = source_axes;
  int max_observer = 0;
  std::vector<std::pair<int, KernelStep>> encoder_steps;  // (observer, step)
  for (const detail::Section* sec : kernel_secs) {
    KernelStep step = detail::parse_step(*sec, known, /*decoder=*/false, name);
    max_observer = std::max(max_observer, step.target.observer);
    encoder_steps.emplace_back(step.target.observer, std::move(step));
  }
  std::vector<KernelStep> decoder_steps;
  for (const detail::Section* sec : decoder_secs) {
    decoder_steps.push_back(
        detail::parse_step(*sec, known, /*decoder=*/true, name));
  }

  BtSystem sys;
  sys.source = Pmf(source_axes, probs);
  sys.encoders.resize(static_cast<std::size_t>(max_observer));
  for (auto& [obs, step] : encoder_steps) {
    sys.encoders[static_cast<std::size_t>(obs - 1)].steps.push_back(
        std::move(step));
  }
  for (CausalKernel& enc : sys.encoders) {
    std::sort(enc.steps.begin(), enc.steps.end(),
              [](const KernelStep& a, const KernelStep& b) {
                return a.target.time < b.target.time;
              });
  }
  std::sort(decoder_steps.begin(), decoder_steps.end(),
            [](const KernelStep& a, const KernelStep& b) {
              return a.target.time < b.target.time;
            });
  sys.decoder.steps = std::move(decoder_steps);
  sys.validate();

  const int t_len = sys.horizon();
  const int K = sys.observers();

  // --- [distortion] ----------------------------------------------------
  int x_card = 0;
  for (const Axis& ax : source_axes) {
    if (ax.observer == 0) x_card = ax.card;
  }
  const int xhat_card = sys.decoder.steps.front().target.card;
  std::vector<double> sd(static_cast<std::size_t>(x_card * xhat_card), -1.0);
  for (const detail::SectionLine& line : distortion_sec->lines) {
    auto [coords, vals] = detail::split_row(line, name);
    if (coords.size() != 2 || vals.size() != 1) {
      throw detail::parse_err(name, line.number,
                              "distortion line needs: x xhat ; value");
    }
    const int x = detail::read_coord(coords[0], x_card, name, line.number, "x");
    const int xh =
        detail::read_coord(coords[1], xhat_card, name, line.number, "xhat");
    double v = 0.0;
    if (!detail::to_double(vals[0], v) || v < 0.0) {
      throw detail::parse_err(name, line.number,
                              "bad distortion value '" + vals[0] + "'");
    }
    const std::size_t at = static_cast<std::size_t>(x * xhat_card + xh);
    if (sd[at] >= 0.0) {
      throw detail::parse_err(name, line.number, "duplicate distortion entry");
    }
    sd[at] = v;
  }
  for (double v : sd) {
    if (v < 0.0) {
      throw detail::parse_err(name, distortion_sec->header_line,
                              "distortion table incomplete: need all " +
                                  std::to_string(x_card * xhat_card) +
                                  " (x, xhat) pairs");
    }
  }

  // --- [params] ---------------------------------------------------------
  CodeParams params;
  params.sd = std::move(sd);
  const std::size_t tk = static_cast<std::size_t>(t_len) * static_cast<std::size_t>(K);
  bool have_d = false;
  bool have_l = false;
  bool have_m = false;
  auto fill_grid = [&](const std::vector<double>& flat,
                       std::vector<std::vector<double>>& grid) {
    grid.assign(static_cast<std::size_t>(t_len),
                std::vector<double>(static_cast<std::size_t>(K), 0.0));
    for (int i = 0; i < t_len; ++i) {
      for (int k = 0; k < K; ++k) {
        grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
            flat[static_cast<std::size_t>(i) * static_cast<std::size_t>(K) +
                 static_cast<std::size_t>(k)];
      }
    }
  };
  params.alpha.assign(static_cast<std::size_t>(t_len),
                      std::vector<double>(static_cast<std::size_t>(K), 0.0));
  params.beta = params.alpha;
  params.pi.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) params.pi[static_cast<std::size_t>(k)] = k + 1;

  for (const detail::SectionLine& line : params_sec->lines) {
    const std::size_t eq = line.text.find('=');
    if (eq == std::string::npos) {
      throw detail::parse_err(name, line.number, "expected 'key = value(s)'");
    }
    const std::string key = detail::trim(line.text.substr(0, eq));
    const std::vector<std::string> toks =
        detail::split_tokens(line.text.substr(eq + 1));
    if (toks.empty()) {
      throw detail::parse_err(name, line.number, "no value for '" + key + "'");
    }
    if (key == "n") {
      long long n = 0;
      if (toks.size() != 1 || !detail::to_int(toks[0], n) || n < 1) {
        throw detail::parse_err(name, line.number, "n wants one integer >= 1");
      }
      params.n = static_cast<int>(n);
    } else if (key == "d") {
      const std::vector<double> vals = detail::broadcast_values(
          toks, static_cast<std::size_t>(t_len), key, name, line.number);
      params.d = vals;
      have_d = true;
    } else if (key == "alpha" || key == "beta") {
      const std::vector<double> vals =
          detail::broadcast_values(toks, tk, key, name, line.number);
      fill_grid(vals, key == "alpha" ? params.alpha : params.beta);
    } else if (key == "L" || key == "M") {
      const std::vector<double> vals =
          detail::broadcast_values(toks, tk, key, name, line.number);
      auto& grid = key == "L" ? params.L : params.M;
      grid.assign(static_cast<std::size_t>(t_len),
                  std::vector<long long>(static_cast<std::size_t>(K), 1));
      for (int i = 0; i < t_len; ++i) {
        for (int k = 0; k < K; ++k) {
          const double v = vals[static_cast<std::size_t>(i) *
                                    static_cast<std::size_t>(K) +
                                static_cast<std::size_t>(k)];
          if (v < 1.0 || v != std::floor(v)) {
            throw detail::parse_err(name, line.number,
                                    key + " entries must be integers >= 1");
          }
          grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
              static_cast<long long>(v);
        }
      }
      (key == "L" ? have_l : have_m) = true;
    } else if (key == "perm") {
      if (toks.size() != static_cast<std::size_t>(K)) {
        throw detail::parse_err(name, line.number,
                                "perm wants " + std::to_string(K) + " observers");
      }
      for (int k = 0; k < K; ++k) {
        long long o = 0;
        if (!detail::to_int(toks[static_cast<std::size_t>(k)], o) || o < 1 ||
            o > K) {
          throw detail::parse_err(name, line.number, "bad perm entry");
        }
        params.pi[static_cast<std::size_t>(k)] = static_cast<int>(o);
      }
    } else {
      throw detail::parse_err(name, line.number, "unknown key '" + key + "'");
    }
  }
  if (!have_d) {
    throw detail::parse_err(name, params_sec->header_line, "missing 'd'");
  }
  if (!have_l) {
    throw detail::parse_err(name, params_sec->header_line, "missing 'L'");
  }
  if (!have_m) params.M = params.L;
  params.validate(t_len, K);
  return {std::move(sys), std::move(params)};
}

/// Loads and parses a system description from a file on disk.
inline ParsedSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ":0: cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str(), path);
}

}  // namespace ceorate::finite
