#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlsys/evolve.hpp"
#include "nlsys/grid.hpp"
#include "nlsys/minimizer.hpp"
#include "nlsys/model.hpp"

namespace nlsys::cli {

/// Raw `key = value` pairs. Lines starting with '#' and blank lines are
/// ignored; unknown and duplicate keys are configuration errors.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::filesystem::path& path);

struct KeyInfo {
    const char* key;
    const char* fallback;  ///< nullptr marks a mandatory key
    const char* help;
};

/// Every accepted key with its default and a one-line description.
const std::vector<KeyInfo>& config_schema();

/// Values set from the command line; they win over the file.
struct Overrides {
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

struct RunConfig {
    KeyValues resolved;  ///< every key, defaults expanded

    ModelParams model;
    GridSpec grid;
    SolverConfig solver;
    EvolveConfig evolve;

    std::vector<double> scan_a1;
    std::vector<double> scan_a2;
    double strict_margin = 1e-4;
    bool warm_start = true;
    std::string scan_table;  ///< re-check an existing table instead of solving

    std::vector<double> deltas;
    std::vector<int> separations;
    double split_width = 1.0;

    std::string start1, start2;          ///< solver.init = file
    std::string initial1, initial2;      ///< evolve initial data (empty: ground state)
    std::string reference1, reference2;  ///< stability reference (empty: solve)
    std::string rearrange_u, rearrange_v;
    double rearrange_gamma = 2.0;

    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    int threads = 1;

    /// `key = value` lines for every key in schema order.
    std::string to_text() const;
};

/// Applies defaults and overrides, then converts to typed values. With
/// `require_model` false the mandatory model/grid keys may be absent.
RunConfig resolve(KeyValues values, const Overrides& overrides, bool require_model = true);

/// Thread count from NLSYS_THREADS, or 1 when unset.
int default_threads();

}  // namespace nlsys::cli
