#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fracwsgl/harness.hpp"

namespace {

using fracwsgl::StudyKind;

struct Command {
    const char* name;
    const char* help;
    StudyKind kind;
};

const Command kCommands[] = {
    {"weights", "Dump GL and WSGL weight tables", StudyKind::weights},
    {"diagnostics", "Condition numbers and residuals of the starting-weight systems",
     StudyKind::diagnostics},
    {"operator-study", "Pointwise error of the corrected operator on power functions",
     StudyKind::operator_error},
    {"fode", "Convergence tables for multi-term fractional ODEs", StudyKind::fode},
    {"wave", "Convergence tables for the diffusion-wave equation", StudyKind::wave},
    {"subdiff", "Convergence tables for the two-term subdiffusion equation",
     StudyKind::subdiffusion},
};

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw fracwsgl::Error("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw fracwsgl::Error("write to '" + path.string() + "' failed");
    }
}

// One study goes to --out; several studies treat --out as a directory and
// write <section>.csv into it. Without --out the config's `output` key is
// used, and stdout as a last resort.
void run(const Command& cmd, const std::string& config_path, const std::string& out) {
    const auto studies = fracwsgl::load_study_configs(config_path);
    for (const auto& s : studies) {
        if (s.kind != cmd.kind) {
            throw fracwsgl::InvalidParameter("[" + s.name + "] is not a " + cmd.name + " study");
        }
    }
    const std::size_t workers = fracwsgl::default_workers();
    for (const auto& s : studies) {
        const auto result = fracwsgl::run_study(s, workers);
        std::filesystem::path target;
        if (!out.empty()) {
            target = studies.size() == 1 ? std::filesystem::path(out)
                                         : std::filesystem::path(out) / (s.name + ".csv");
        } else if (!s.output.empty()) {
            target = s.output;
        }
        if (target.empty()) {
            std::cout << result.csv;
        } else {
            write_file(target, result.csv);
            std::cerr << "[" << s.name << "] wrote " << target.string() << '\n';
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corrected WSGL solvers for fractional differential equations"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    for (const auto& cmd : kCommands) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config, "Study config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output CSV file (directory for multi-study configs)");
        sub->callback([&cmd, &config, &out] { run(cmd, config, out); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "fracwsgl: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
