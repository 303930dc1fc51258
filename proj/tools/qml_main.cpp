#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "qml/error.hpp"
#include "qml/expcli.hpp"

// Exit codes: 0 ok, 2 config error, 3 numerical failure.
int main(int argc, char** argv) {
  CLI::App app{"qml: conditional-mutual-information laboratory for lattice Gibbs states"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = -1;
  int threads = 0;

  for (const auto& name : qml::experiment_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override config seed");
    sub->add_option("--threads", threads, "BLAS thread count");
  }

  CLI11_PARSE(app, argc, argv);
  auto* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();

  if (threads > 0) {
    setenv("OPENBLAS_NUM_THREADS", std::to_string(threads).c_str(), 1);
    setenv("OMP_NUM_THREADS", std::to_string(threads).c_str(), 1);
  }

  try {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "{\"error\":\"config-error\",\"detail\":\"cannot open "
                << config_path << "\"}\n";
      return 2;
    }
    qml::Json config;
    try {
      f >> config;
    } catch (const std::exception& e) {
      std::cerr << "{\"error\":\"config-error\",\"detail\":" << qml::Json(e.what())
                << "}\n";
      return 2;
    }
    if (seed >= 0) config["seed"] = seed;
    if (!out_dir.empty()) config["out"] = out_dir;

    qml::ExperimentRecord rec = qml::run(cmd, config);
    std::string out = rec.config.value("out", std::string("out/") + cmd);
    qml::emit(rec, out);
    std::cout << "wrote " << out << " (" << rec.tables.size()
              << " tables, " << rec.wall_seconds << " s)\n";
    return 0;
  } catch (const qml::Error& e) {
    qml::Json diag{{"error", e.code()}, {"detail", e.what()}};
    std::cerr << diag.dump() << "\n";
    return e.code() == "config-error" ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << qml::Json{{"error", "internal"}, {"detail", e.what()}}.dump()
              << "\n";
    return 3;
  }
}
