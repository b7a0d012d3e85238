#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/kernel.hpp"

namespace hawkes_evolve {

// Event types of the merged process. Values match the CSV "mark" column.
enum class Mark : std::uint8_t { Mutant = 1, Clone = 2, Death = 3 };

constexpr std::size_t slot(Mark m) noexcept { return static_cast<std::size_t>(m) - 1; }

inline const char* mark_name(Mark m) noexcept {
  switch (m) {
    case Mark::Mutant: return "mutant";
    case Mark::Clone: return "clone";
    case Mark::Death: return "death";
  }
  return "?";
}

using Rates = std::array<double, 3>;
using Mat2 = std::array<std::array<double, 2>, 2>;

// Exponential kernels phi_ji(t) = delta[j][i] + alpha[j][i] exp(-beta[i] t).
// Indexing is [source j][target i]; the decay rate belongs to the target, so
// phi_1i and phi_2i share beta[i] by construction.
struct ExponentialKernels {
  Mat2 alpha{};
  Mat2 delta{};
  std::array<double, 2> beta{1.0, 1.0};
  ExpKernel death{};

  ExpKernel birth(std::size_t j, std::size_t i) const {
    return ExpKernel(alpha[j][i], beta[i], delta[j][i]);
  }

  friend bool operator==(const ExponentialKernels&, const ExponentialKernels&) = default;
};

struct GeneralKernels {
  std::array<std::array<Kernel, 2>, 2> birth;  // [source j][target i]
  Kernel death;
};

class KernelBank {
 public:
  KernelBank(Rates base_rates, ExponentialKernels kernels)
      : base_rates_(base_rates), kernels_(std::move(kernels)) {
    validate();
  }
  KernelBank(Rates base_rates, GeneralKernels kernels)
      : base_rates_(base_rates), kernels_(std::move(kernels)) {
    validate();
  }

  // All excitation functions zero.
  static KernelBank poisson(Rates base_rates) {
    return KernelBank(base_rates, ExponentialKernels{});
  }

  const Rates& base_rates() const noexcept { return base_rates_; }
  double base_rate(std::size_t s) const { return base_rates_.at(s); }

  Kernel birth_kernel(std::size_t j, std::size_t i) const {
    if (const auto* e = std::get_if<ExponentialKernels>(&kernels_)) return e->birth(j, i);
    return std::get<GeneralKernels>(kernels_).birth.at(j).at(i);
  }

  Kernel death_kernel() const {
    if (const auto* e = std::get_if<ExponentialKernels>(&kernels_)) return e->death;
    return std::get<GeneralKernels>(kernels_).death;
  }

  // Exponential parameters if every kernel is exponential with one decay rate
  // per target, regardless of how the bank was constructed.
  std::optional<ExponentialKernels> exponential() const {
    if (const auto* e = std::get_if<ExponentialKernels>(&kernels_)) return *e;
    const auto& g = std::get<GeneralKernels>(kernels_);
    ExponentialKernels out;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const auto* k = std::get_if<ExpKernel>(&g.birth[j][i]);
        if (k == nullptr) return std::nullopt;
        if (j == 0) {
          out.beta[i] = k->beta;
        } else if (k->beta != out.beta[i]) {
          return std::nullopt;
        }
        out.alpha[j][i] = k->alpha;
        out.delta[j][i] = k->delta;
      }
    }
    const auto* d = std::get_if<ExpKernel>(&g.death);
    if (d == nullptr) return std::nullopt;
    out.death = *d;
    return out;
  }

  bool all_non_increasing() const {
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < 2; ++i)
        if (!is_non_increasing(birth_kernel(j, i))) return false;
    return is_non_increasing(death_kernel());
  }

  bool any_offset() const {
    auto has_offset = [](const Kernel& k) {
      const auto* e = std::get_if<ExpKernel>(&k);
      return e != nullptr && e->delta != 0.0;
    };
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < 2; ++i)
        if (has_offset(birth_kernel(j, i))) return true;
    return has_offset(death_kernel());
  }

  // Same bank with every exponential decay rate multiplied by `factor`.
  KernelBank with_scaled_decay(double factor) const {
    auto e = exponential();
    if (!e) throw UnsupportedError("with_scaled_decay: bank is not exponential");
    e->beta[0] *= factor;
    e->beta[1] *= factor;
    e->death.beta *= factor;
    return KernelBank(base_rates_, *e);
  }

 private:
  void validate() const {
    for (double r : base_rates_) {
      if (!(r > 0.0)) throw DomainError("KernelBank: base rates must be > 0");
    }
    if (const auto* e = std::get_if<ExponentialKernels>(&kernels_)) {
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < 2; ++i) (void)e->birth(j, i);  // throws if invalid
      (void)ExpKernel(e->death.alpha, e->death.beta, e->death.delta);
    }
  }

  Rates base_rates_;
  std::variant<ExponentialKernels, GeneralKernels> kernels_;
};

// (a) exponential form with shared per-target decay, (b) no constant offsets,
// (c) alpha <= beta everywhere. (b) and (c) are only meaningful under (a).
struct AdmissibilityReport {
  bool exponential_form = false;
  std::optional<bool> zero_offsets;
  std::optional<bool> jumps_below_decay;

  bool exact_markov() const { return exponential_form && zero_offsets.value_or(false); }
};

inline AdmissibilityReport is_markov_admissible(const KernelBank& bank) {
  AdmissibilityReport r;
  const auto e = bank.exponential();
  if (!e) return r;
  r.exponential_form = true;
  r.zero_offsets = !bank.any_offset();
  bool below = e->death.alpha <= e->death.beta;
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 2; ++i) below = below && e->alpha[j][i] <= e->beta[i];
  r.jumps_below_decay = below;
  return r;
}

// ---------------------------------------------------------------------------
// JSON: {"base_rates":[l1,l2,l3],
//        "birth_kernels":[[phi_11, phi_12],[phi_21, phi_22]],
//        "death_kernel":psi}
// with each kernel {"alpha":a,"beta":b,"delta":d}; "delta" defaults to 0.

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError(where + ": unknown key \"" + key + "\"");
  }
}

inline double number_at(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing \"" + key + "\"");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(where + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

inline ExpKernel kernel_from_json(const nlohmann::json& j, const std::string& where) {
  reject_unknown_keys(j, {"alpha", "beta", "delta"}, where);
  const double a = number_at(j, "alpha", where);
  const double b = number_at(j, "beta", where);
  const double d = j.contains("delta") ? number_at(j, "delta", where) : 0.0;
  try {
    return ExpKernel(a, b, d);
  } catch (const DomainError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline nlohmann::json kernel_to_json(const ExpKernel& k) {
  return {{"alpha", k.alpha}, {"beta", k.beta}, {"delta", k.delta}};
}

}  // namespace detail

inline KernelBank bank_from_json(const nlohmann::json& doc) {
  detail::reject_unknown_keys(doc, {"base_rates", "birth_kernels", "death_kernel"}, "bank");
  if (!doc.contains("base_rates") || !doc.contains("birth_kernels") ||
      !doc.contains("death_kernel")) {
    throw ParseError("bank: requires base_rates, birth_kernels and death_kernel");
  }
  const auto& br = doc.at("base_rates");
  if (!br.is_array() || br.size() != 3) throw ParseError("bank: base_rates must have 3 entries");
  Rates rates{};
  for (std::size_t s = 0; s < 3; ++s) {
    if (!br[s].is_number()) throw ParseError("bank: base_rates must be numbers");
    rates[s] = br[s].get<double>();
    if (!(rates[s] > 0.0)) throw ParseError("bank: base rates must be > 0");
  }
  const auto& bk = doc.at("birth_kernels");
  if (!bk.is_array() || bk.size() != 2 || !bk[0].is_array() || !bk[1].is_array() ||
      bk[0].size() != 2 || bk[1].size() != 2) {
    throw ParseError("bank: birth_kernels must be a 2x2 array");
  }
  GeneralKernels g;
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 2; ++i)
      g.birth[j][i] = detail::kernel_from_json(
          bk[j][i], "birth_kernels[" + std::to_string(j) + "][" + std::to_string(i) + "]");
  g.death = detail::kernel_from_json(doc.at("death_kernel"), "death_kernel");
  KernelBank general(rates, std::move(g));
  if (auto e = general.exponential()) return KernelBank(rates, *e);
  return general;
}

inline KernelBank bank_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bank: ") + e.what());
  }
  return bank_from_json(doc);
}

inline nlohmann::json bank_to_json(const KernelBank& bank) {
  nlohmann::json birth = nlohmann::json::array();
  for (std::size_t j = 0; j < 2; ++j) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t i = 0; i < 2; ++i) {
      const Kernel k = bank.birth_kernel(j, i);
      const auto* e = std::get_if<ExpKernel>(&k);
      if (e == nullptr) throw UnsupportedError("bank_to_json: general kernels are not serializable");
      row.push_back(detail::kernel_to_json(*e));
    }
    birth.push_back(row);
  }
  const Kernel d = bank.death_kernel();
  const auto* de = std::get_if<ExpKernel>(&d);
  if (de == nullptr) throw UnsupportedError("bank_to_json: general kernels are not serializable");
  const auto& r = bank.base_rates();
  return {{"base_rates", {r[0], r[1], r[2]}},
          {"birth_kernels", birth},
          {"death_kernel", detail::kernel_to_json(*de)}};
}

}  // namespace hawkes_evolve
