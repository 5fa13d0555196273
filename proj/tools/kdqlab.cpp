#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kdqlab/cli.hpp"

namespace {

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw kdqlab::Error(kdqlab::ErrorKind::Io, "cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::map<std::string, std::string> descriptions = {
    {"charfn", "sample G(u) from the analytic, circuit or pulse source"},
    {"spectrum", "Fourier transform G(u) and integrate the work peaks"},
    {"kdq", "KDQ and TPM tables"},
    {"moments", "first and second work moments for both schemes"},
    {"correlation", "correlation function, covariance and commutator"},
    {"rsur", "uncertainty-relation sides over a mixture sweep"},
    {"tpm-compare", "KDQ against TPM, including the circuit mixture trace"},
    {"nv-verify", "NV gate decompositions and pulse-sequence fidelity"},
    {"noise-study", "seeded noise ensemble through the reconstruction pipeline"},
    {"figures", "all figure tables with default settings"},
};

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Kirkwood-Dirac work statistics laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::map<std::string, std::string> overrides;
    app.add_option("--config", config_path, "key = value configuration file");
    for (const char *key : {"out", "seed", "preset"})
        app.add_option_function<std::string>(std::string("--") + key,
                                             [&overrides, key](const std::string &v) { overrides[key] = v; },
                                             std::string("override config key '") + key + "'");

    for (const auto &name : kdqlab::subcommand_names()) {
        CLI::App *sub = app.add_subcommand(name, descriptions.at(name));
        for (const auto &key : kdqlab::config_keys()) {
            if (key == "out" || key == "seed" || key == "preset") continue;
            sub->add_option_function<std::string>("--" + key,
                                                  [&overrides, key](const std::string &v) { overrides[key] = v; },
                                                  "override config key '" + key + "'");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kdqlab::exit_code::config_error;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        kdqlab::KeyValues kv = config_path.empty() ? kdqlab::KeyValues{} : kdqlab::parse_key_values(read_file(config_path));
        for (const auto &[k, v] : overrides) kv[k] = v;
        const kdqlab::RunConfig cfg = kdqlab::build_config(kv);
        return kdqlab::run_subcommand(name, cfg, std::cout);
    } catch (const kdqlab::Error &e) {
        std::cerr << "kdqlab " << name << ": " << e.what() << "\n";
        return kdqlab::exit_code_for(e);
    } catch (const std::exception &e) {
        std::cerr << "kdqlab " << name << ": " << e.what() << "\n";
        return kdqlab::exit_code::failure;
    }
}
