#pragma once

#include <ostream>

#include "irsr/config.hpp"

namespace irsr {

// Command layer behind the CLI binary. Each command consumes one resolved
// JSON document (config file merged with flag overrides by the caller),
// echoes it as resolved_config.json into its output directory for
// provenance, and reports through the given streams. Errors surface as the
// usual taxonomy; exit_code_for turns them into process exit codes.

// 0 success, 2 config or value, 3 input or dimension, 4 numeric, 5 io,
// 1 anything else.
int exit_code_for(const std::exception& e);

// Materializes (degraded, clean) pairs for every manifest entry under
// cfg["out"]. Unreadable entries are reported one line each to err and
// skipped; any failure turns the exit code nonzero while the remaining
// entries still materialize.
int run_simulate(const Json& cfg, std::ostream& out, std::ostream& err);

// Runs the two-phase schedule, writing checkpoints and metrics.jsonl under
// cfg["out"]. cfg["checkpoint"] resumes from a saved state.
int run_train(const Json& cfg, std::ostream& out);

// Applies a trained checkpoint to one band via tiled generation; writes
// the enhanced raster plus its throughput sidecar under cfg["out"].
int run_infer(const Json& cfg, std::ostream& out);

// Compares an enhanced image against a reference: PSNR / SSIM / MSE into
// metrics.json plus a side-by-side panel image. cfg["input"] optionally
// prepends the degraded input to the panel.
int run_eval(const Json& cfg, std::ostream& out);

// Generates a procedural dataset (and optionally a single synthetic band)
// under cfg["out"], so every other command can run without source data.
int run_synth(const Json& cfg, std::ostream& out);

}  // namespace irsr
