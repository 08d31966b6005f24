#include "vlpic/errors.hpp"
#include "vlpic/run.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kConfig = 2, kNonconvergence = 3, kIo = 4 };

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

int fail(ExitCode code, const char* kind, const std::string& message) {
  std::cerr << "error: code=" << code << " kind=" << kind << " message=" << quoted(message) << "\n";
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-conserving PIC simulator for the reduced spin Vlasov-Maxwell models"};
  std::string config_path;
  vlpic::RunOptions options;
  std::string resume;
  app.add_option("--config", config_path, "Configuration file")->required();
  app.add_option("--out", options.out_dir, "Output directory")->required();
  app.add_option("--workers", options.workers, "Worker threads for particle loops")
      ->check(CLI::PositiveNumber);
  app.add_option("--resume", resume, "Checkpoint to resume from");
  app.add_flag("--quiet", options.quiet, "Suppress progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (!resume.empty()) options.resume = resume;

  try {
    const vlpic::SimConfig config = vlpic::load_config(config_path);
    vlpic::run(config, options, std::cout);
  } catch (const vlpic::ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const vlpic::NonconvergenceError& e) {
    return fail(kNonconvergence, "nonconvergence", e.what());
  } catch (const vlpic::IoError& e) {
    return fail(kIo, "io", e.what());
  } catch (const vlpic::UnsupportedError& e) {
    return fail(kConfig, "unsupported", e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
  return kOk;
}
