#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hvsim/theories.hpp"

namespace hvsim {

/// Everything one command invocation needs. Every random choice derives
/// from `seed`.
struct RunConfig {
    std::string command;   // theory | history | axioms | demo
    std::string mode;      // axiom name or demo name
    TheoryId theory = TheoryId::Flow;

    std::optional<std::filesystem::path> state, unitary, unitary_b, circuit, ensemble, p0, p1, table, replay;
    std::optional<std::filesystem::path> output;
    std::optional<std::uint64_t> seed;
    bool csv = false;

    // tolerance overrides
    std::optional<double> tol;
    double sinkhorn_tol = 1e-10;
    std::size_t max_iter = 100000;

    // sampling and demo sizes
    std::size_t samples = 1;
    std::size_t trials = 1;
    std::size_t runs = 1;
    int qubits = 4;           // juggle register width
    std::size_t attempts = 0;
    int n = 3;
    std::size_t calls = 0;
    std::size_t call_factor = 4;
    std::optional<std::uint64_t> a, b, marked;
    bool minus = false;
    double delta = 1e-6;
    std::string level = "stochastic";
    std::optional<std::string> expect;
};

/// Parses arguments (without the program name) into a config. Throws
/// Error(Parse) on bad usage; returns nullopt after printing help.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out);

/// Runs a parsed config. Returns 0 on success or a passing verdict, 1 on a
/// failing one; throws on errors.
int execute(const RunConfig& config, std::ostream& out);

/// parse_args then execute; errors are reported on `err` with exit code 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hvsim
