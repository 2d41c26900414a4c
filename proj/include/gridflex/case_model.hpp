#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gridflex/error.hpp"

namespace gridflex {

struct Bus {
  int id = 0;
  double base_load = 0.0;  // MW at the 100% load level
  bool is_reference = false;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;  // p.u. on the case MVA base
  double rate_a = 0.0;     // MW

  bool operator==(const Branch&) const = default;
};

struct Generator {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double cost = 0.0;     // $/MWh
  double ramp_up = 0.0;  // MW/min

  bool operator==(const Generator&) const = default;
};

/// Solar plant; availability (MW) is given per scenario label.
struct SolarSite {
  int bus = 0;
  std::map<std::string, double> available;

  bool operator==(const SolarSite&) const = default;
};

struct DataCenter {
  int id = 0;
  int bus = 0;
  double original_load = 0.0;  // MW
  double cap = 0.0;            // MW

  bool operator==(const DataCenter&) const = default;
};

/// Immutable description of a power system. Entity order is file order and
/// every per-entity vector elsewhere in the library follows it.
struct Case {
  std::string name;
  double base_mva = 100.0;
  double reserve_window = 10.0;  // minutes
  std::map<std::string, double> scenario_multipliers;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::vector<SolarSite> solar_sites;
  std::vector<DataCenter> data_centers;

  /// Position of bus `id` in `buses`; throws ValidationError if absent.
  int bus_index(int id) const;
  /// Position of the first reference bus, or -1.
  int reference_index() const;
  double total_base_load() const;
  double total_dc_load() const;
  double max_generator_cost() const;
  /// Labels known to the case: `[scenarios]` entries followed by any extra
  /// labels that only appear in solar maps.
  std::vector<std::string> scenario_labels() const;

  /// Structural equality; `name` is not part of the data.
  bool operator==(const Case& other) const;
};

struct Violation {
  std::string kind;  // entity kind: "case", "bus", "branch", "generator", "solar", "datacenter"
  int id = 0;        // entity id (bus id for solar sites), 0 for case-level
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Every invariant violation of `c`, ordered by (entity kind, id).
std::vector<Violation> validate(const Case& c);

/// Parses the sectioned case format documented in docs/case-format.md and
/// validates the result. Throws ParseError on syntax problems (with line and
/// field) and ValidationError naming the first violation otherwise. With
/// `check` false only syntax is enforced; call `validate` yourself.
Case parse_case(std::istream& source, std::string_view source_name = "<input>",
                bool check = true);
Case load_case(const std::filesystem::path& path, bool check = true);
/// Writes `c` in the same format; numbers use shortest round-trip form.
void write_case(const Case& c, std::ostream& out);

enum class DcMode { NoDc, Fixed, Flexible };

std::string_view to_string(DcMode mode);
/// Accepts "no-dc", "fixed", "flexible".
DcMode parse_dc_mode(std::string_view text);

inline constexpr double kDefaultAlphaPenalty = 10'000.0;

struct ScenarioSpec {
  std::string label = "shoulder";
  double load_multiplier = 1.0;
  DcMode dc_mode = DcMode::NoDc;
  double beta = 0.0;
  bool relaxed = false;
  double alpha_penalty = kDefaultAlphaPenalty;  // $/MW of virtual capacity
};

/// Scenario for `label` with the case's multiplier for that label. The
/// conventions peak=1.2, shoulder=1.0, off-peak=0.8 apply when the case has
/// no `[scenarios]` entry for it.
ScenarioSpec make_scenario(const Case& c, const std::string& label, DcMode mode,
                           double beta = 0.0, bool relaxed = false);

/// A case specialized by a scenario. Immutable once built.
struct Instance {
  std::shared_ptr<const Case> grid;
  ScenarioSpec scenario;
  Eigen::VectorXd effective_load;   // per bus: base_load * load_multiplier
  Eigen::VectorXd effective_solar;  // per bus: sum of site availability for the label
  Eigen::VectorXd site_available;   // per solar site
  std::vector<bool> dc_active;      // per data center

  const Case& case_data() const { return *grid; }
  bool has_dc_variables() const { return scenario.dc_mode != DcMode::NoDc; }
};

Instance apply_scenario(std::shared_ptr<const Case> c, const ScenarioSpec& scenario);

}  // namespace gridflex
