#pragma once

// Versioned text format for a single SugenoFis.
//
//   crimefis-model 1
//   variant anfis
//   consequent linear
//   dimensions 4
//   dimension latitude 4
//   <center> <sigma>          (one line per MF, bank order)
//   ...
//   rules 64
//   <idx...> : <coef...> <bias>   (linear)   or   <idx...> : <value>   (constant)
//
// Reals are written with 17 significant digits so that reading them back
// restores the exact doubles.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "crimefis/error.hpp"
#include "crimefis/fuzzy.hpp"

namespace crimefis {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) return line;
  }
  throw ModelError(std::string("model file truncated: expected ") + what);
}

template <typename T>
T read_field(std::istringstream& ss, const char* what) {
  std::string tok;
  if (!(ss >> tok)) throw ModelError(std::string("model file: missing ") + what);
  T v{};
  if (!parse_number(tok, v)) throw ModelError(std::string("model file: bad ") + what + " '" + tok + "'");
  return v;
}

inline void expect_keyword(std::istringstream& ss, const std::string& kw) {
  std::string tok;
  if (!(ss >> tok) || tok != kw) throw ModelError("model file: expected '" + kw + "'");
}

}  // namespace detail

inline void write_model(std::ostream& out, const SugenoFis& fis) {
  const bool linear = fis.has_linear_consequents();
  out << "crimefis-model " << kModelFormatVersion << '\n';
  out << "variant " << to_string(fis.variant()) << '\n';
  out << "consequent " << (linear ? "linear" : "constant") << '\n';
  out << "dimensions " << fis.dims() << '\n';
  for (std::size_t d = 0; d < fis.dims(); ++d) {
    out << "dimension " << fis.dimension_names()[d] << ' ' << fis.mf_banks()[d].size() << '\n';
    for (const auto& mf : fis.mf_banks()[d]) {
      out << detail::format_real(mf.center()) << ' ' << detail::format_real(mf.sigma()) << '\n';
    }
  }
  out << "rules " << fis.rule_count() << '\n';
  for (const auto& rule : fis.rules()) {
    for (auto idx : rule.antecedent) out << idx << ' ';
    out << ':';
    if (const auto* k = std::get_if<ConstantConsequent>(&rule.consequent)) {
      out << ' ' << detail::format_real(k->value);
    } else {
      const auto& lin = std::get<LinearConsequent>(rule.consequent);
      for (double c : lin.coefficients) out << ' ' << detail::format_real(c);
      out << ' ' << detail::format_real(lin.bias);
    }
    out << '\n';
  }
}

inline std::string to_text(const SugenoFis& fis) {
  std::ostringstream ss;
  write_model(ss, fis);
  return ss.str();
}

inline SugenoFis read_model(std::istream& in) {
  std::istringstream header(detail::next_line(in, "header"));
  detail::expect_keyword(header, "crimefis-model");
  const int version = detail::read_field<int>(header, "version");
  if (version != kModelFormatVersion) {
    throw ModelError("unsupported model format version " + std::to_string(version));
  }

  std::istringstream vline(detail::next_line(in, "variant"));
  detail::expect_keyword(vline, "variant");
  std::string vname;
  vline >> vname;
  Variant variant;
  try {
    variant = parse_variant(vname);
  } catch (const ConfigError& e) {
    throw ModelError(e.what());
  }

  std::istringstream cline(detail::next_line(in, "consequent"));
  detail::expect_keyword(cline, "consequent");
  std::string kind;
  cline >> kind;
  if (kind != "linear" && kind != "constant") throw ModelError("unknown consequent kind '" + kind + "'");
  const bool linear = kind == "linear";

  std::istringstream dline(detail::next_line(in, "dimensions"));
  detail::expect_keyword(dline, "dimensions");
  const auto dims = detail::read_field<std::size_t>(dline, "dimension count");

  std::vector<std::string> names;
  std::vector<std::vector<GaussianMF>> banks;
  for (std::size_t d = 0; d < dims; ++d) {
    std::istringstream bl(detail::next_line(in, "dimension"));
    detail::expect_keyword(bl, "dimension");
    std::string name;
    if (!(bl >> name)) throw ModelError("model file: missing dimension name");
    const auto count = detail::read_field<std::size_t>(bl, "MF count");
    std::vector<GaussianMF> bank;
    for (std::size_t k = 0; k < count; ++k) {
      std::istringstream ml(detail::next_line(in, "membership function"));
      const auto c = detail::read_field<double>(ml, "center");
      const auto s = detail::read_field<double>(ml, "sigma");
      bank.emplace_back(c, s);
    }
    names.push_back(std::move(name));
    banks.push_back(std::move(bank));
  }

  std::istringstream rl(detail::next_line(in, "rules"));
  detail::expect_keyword(rl, "rules");
  const auto nrules = detail::read_field<std::size_t>(rl, "rule count");
  std::vector<Rule> rules;
  rules.reserve(nrules);
  for (std::size_t i = 0; i < nrules; ++i) {
    std::istringstream ss(detail::next_line(in, "rule"));
    Rule r;
    for (std::size_t d = 0; d < dims; ++d) r.antecedent.push_back(detail::read_field<std::size_t>(ss, "MF index"));
    detail::expect_keyword(ss, ":");
    if (linear) {
      LinearConsequent lin;
      for (std::size_t d = 0; d < dims; ++d) lin.coefficients.push_back(detail::read_field<double>(ss, "coefficient"));
      lin.bias = detail::read_field<double>(ss, "bias");
      r.consequent = std::move(lin);
    } else {
      r.consequent = ConstantConsequent{detail::read_field<double>(ss, "constant")};
    }
    std::string extra;
    if (ss >> extra) throw ModelError("model file: trailing data on rule line");
    rules.push_back(std::move(r));
  }
  return SugenoFis(std::move(names), std::move(banks), std::move(rules), variant);
}

inline SugenoFis from_text(const std::string& text) {
  std::istringstream ss(text);
  return read_model(ss);
}

inline void save_model(const std::filesystem::path& path, const SugenoFis& fis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file " + path.string());
  write_model(out, fis);
}

inline SugenoFis load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path.string());
  return read_model(in);
}

}  // namespace crimefis
