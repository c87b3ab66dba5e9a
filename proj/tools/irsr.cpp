#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "irsr/commands.hpp"

namespace {

using irsr::Json;

// Every subcommand folds its flags over an optional JSON config file, flags
// winning, and hands the merged document to the command layer, which echoes
// it back out as resolved_config.json. Each variable below backs exactly
// one flag, so sharing the storage across subcommands is safe.
struct Args {
  std::string config;
  std::string manifest, val_manifest, data_root, out, mode, checkpoint;
  std::string band, mask, out_name, sr, ref, input;
  uint64_t seed = 1;
  int tile = 256, overlap = 32, count = 64, size = 96, band_h = 0, band_w = 0;
  double percentile = 90.0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-resolution of single-band infrared absorbance images"};
  app.require_subcommand(1);

  Args a;
  std::vector<std::function<void(Json&)>> merges;
  const auto bind = [&merges](CLI::Option* o, std::function<void(Json&)> put) {
    merges.push_back([o, put = std::move(put)](Json& cfg) {
      if (o->count() > 0) put(cfg);
    });
  };
  const auto opt_str = [&](CLI::App* cmd, const char* flag, std::string& var, const char* key,
                           const char* help) {
    bind(cmd->add_option(flag, var, help), [&var, key](Json& cfg) { cfg[key] = var; });
  };
  const auto opt_seed = [&](CLI::App* cmd) {
    bind(cmd->add_option("--seed", a.seed, "RNG seed"),
         [&a](Json& cfg) { cfg["seed"] = a.seed; });
  };
  const auto opt_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", a.config, "JSON config file to start from");
  };

  CLI::App* sim = app.add_subcommand("simulate", "materialize degraded/clean pairs from a manifest");
  opt_config(sim);
  opt_str(sim, "--manifest", a.manifest, "manifest", "dataset manifest JSON");
  opt_str(sim, "--data-root", a.data_root, "data_root", "root for relative manifest paths");
  opt_str(sim, "--out", a.out, "out", "output directory");
  opt_seed(sim);

  CLI::App* train = app.add_subcommand("train", "run the two-phase training schedule");
  opt_config(train);
  opt_str(train, "--manifest", a.manifest, "manifest", "training manifest JSON");
  opt_str(train, "--val-manifest", a.val_manifest, "val_manifest", "validation manifest JSON");
  opt_str(train, "--data-root", a.data_root, "data_root", "root for relative manifest paths");
  opt_str(train, "--out", a.out, "out", "output directory");
  opt_str(train, "--mode", a.mode, "mode", "cgan (mask-conditioned) or ugan");
  opt_str(train, "--checkpoint", a.checkpoint, "checkpoint", "resume from this checkpoint");
  opt_seed(train);

  CLI::App* infer = app.add_subcommand("infer", "enhance one absorbance band with a checkpoint");
  opt_config(infer);
  opt_str(infer, "--band", a.band, "band", "input band raster (PGM or PFM)");
  opt_str(infer, "--mask", a.mask, "mask", "mask spec JSON (required by cgan checkpoints)");
  opt_str(infer, "--checkpoint", a.checkpoint, "checkpoint", "trained checkpoint");
  opt_str(infer, "--out", a.out, "out", "output directory");
  opt_str(infer, "--out-name", a.out_name, "out_name", "output raster name (default sr.pgm)");
  bind(infer->add_option("--tile", a.tile, "tile size, multiple of 8"),
       [&a](Json& cfg) { cfg["infer"]["tile"] = a.tile; });
  bind(infer->add_option("--overlap", a.overlap, "tile overlap in pixels"),
       [&a](Json& cfg) { cfg["infer"]["overlap"] = a.overlap; });
  bind(infer->add_option("--percentile", a.percentile, "normalization percentile"),
       [&a](Json& cfg) { cfg["infer"]["percentile"] = a.percentile; });

  CLI::App* eval = app.add_subcommand("eval", "score an enhanced image against a reference");
  opt_config(eval);
  opt_str(eval, "--sr", a.sr, "sr", "enhanced image");
  opt_str(eval, "--ref", a.ref, "ref", "reference image");
  opt_str(eval, "--input", a.input, "input", "degraded input for the comparison panel");
  opt_str(eval, "--out", a.out, "out", "output directory");

  CLI::App* synth = app.add_subcommand("synth", "generate a procedural dataset");
  opt_config(synth);
  opt_str(synth, "--out", a.out, "out", "output directory");
  opt_seed(synth);
  bind(synth->add_option("--count", a.count, "number of image/mask pairs"),
       [&a](Json& cfg) { cfg["synth"]["count"] = a.count; });
  bind(synth->add_option("--size", a.size, "image height and width, multiple of 8"),
       [&a](Json& cfg) {
         cfg["synth"]["height"] = a.size;
         cfg["synth"]["width"] = a.size;
       });
  bind(synth->add_option("--band-height", a.band_h, "also write band.pfm with this height"),
       [&a](Json& cfg) { cfg["band_height"] = a.band_h; });
  bind(synth->add_option("--band-width", a.band_w, "also write band.pfm with this width"),
       [&a](Json& cfg) { cfg["band_width"] = a.band_w; });

  CLI11_PARSE(app, argc, argv);

  try {
    Json cfg = a.config.empty() ? Json::object() : irsr::load_json_file(a.config);
    for (const auto& merge : merges) merge(cfg);
    const std::string name = app.get_subcommands().front()->get_name();
    if ((name == "simulate" || name == "train") && !cfg.contains("data_root")) {
      if (const char* env = std::getenv("IRSR_DATA_ROOT")) cfg["data_root"] = env;
    }
    if (name == "simulate") return irsr::run_simulate(cfg, std::cout, std::cerr);
    if (name == "train") return irsr::run_train(cfg, std::cout);
    if (name == "infer") return irsr::run_infer(cfg, std::cout);
    if (name == "eval") return irsr::run_eval(cfg, std::cout);
    return irsr::run_synth(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return irsr::exit_code_for(e);
  }
}
