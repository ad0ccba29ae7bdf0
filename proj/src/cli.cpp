#include "scensim/cli.hpp"

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "scensim/manager.hpp"

namespace scensim {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitUsage = 64;

bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::WellFormedness:
        case ErrorCode::UnknownType:
        case ErrorCode::SchemaViolation:
        case ErrorCode::ValueTypeMismatch:
        case ErrorCode::MissingBehaviour:
        case ErrorCode::LibraryMismatch:
        case ErrorCode::EmptyRoute:
        case ErrorCode::UsageError:
            return true;
        default:
            return false;
    }
}

std::string read_file_or_die(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UsageError, "cannot read '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int do_check(const std::string& path) {
    TypeRegistry registry = builtin_registry();
    std::string document = read_file_or_die(path);
    Scenario scenario;
    try {
        scenario = parse_scenario(document, registry);
    } catch (const Error& e) {
        std::cout << "FAIL " << e.what() << "\n";
        return kExitValidation;
    }
    ValidationReport report = validate_scenario(scenario, registry);
    for (const auto& finding : report.findings)
        std::cout << finding.path << ": " << error_code_name(finding.code) << " "
                  << finding.message << "\n";
    if (!report.ok()) return kExitValidation;
    std::cout << "OK " << path << " (" << scenario.simulation_objects.size() << " objects, "
              << scenario.observers.size() << " observers, "
              << scenario.simulation_iterations << " iterations)\n";
    return kExitOk;
}

int do_fom(const std::string& path, const std::string& outDir) {
    PlanOptions options;
    options.output_dir = outDir;
    RunPlan plan = plan_run(path, builtin_registry(), options);
    std::cout << "wrote " << (plan.federates.size() + 1) << " modules to " << outDir
              << "/fom\n";
    return kExitOk;
}

int do_run(const std::string& path, const std::string& outDir, const std::string& transport,
           std::uint16_t port) {
    PlanOptions planOptions;
    planOptions.output_dir = outDir;
    TypeRegistry registry = builtin_registry();
    RunPlan plan = plan_run(path, registry, planOptions);

    RunOptions options;
    options.transport = transport == "tcp" ? RunOptions::Transport::Tcp
                                           : RunOptions::Transport::InProc;
    options.port = port;
    RunReport report = run_distributed(plan, options);
    for (const auto& fault : report.faults) std::cerr << "fault: " << fault << "\n";
    if (report.aborted) {
        std::cerr << "run aborted; see " << outDir << "/report.json\n";
        return kExitRuntime;
    }
    std::cout << "completed " << plan.scenario.simulation_iterations << " iterations in "
              << report.wall_clock_seconds << " s; artifacts in " << outDir << "\n";
    return kExitOk;
}

int do_reference(const std::string& path, const std::string& outDir) {
    TypeRegistry registry = builtin_registry();
    Scenario scenario = parse_scenario(read_file_or_die(path), registry);
    ReferenceResult result = run_reference(scenario, registry);
    std::filesystem::create_directories(outDir);
    for (size_t i = 0; i < result.observer_lines.size(); ++i) {
        std::filesystem::path streamPath =
            std::filesystem::path(outDir) / ("observer-" + std::to_string(i) + ".ndjson");
        std::ofstream out(streamPath, std::ios::binary);
        if (!out) throw Error(ErrorCode::SinkFailure, "cannot write " + streamPath.string());
        for (const auto& line : result.observer_lines[i]) out << line << "\n";
    }
    std::cout << "wrote " << result.observer_lines.size() << " stream(s) to " << outDir << "\n";
    return kExitOk;
}

int do_diff(const std::string& a, const std::string& b) {
    std::string left = read_file_or_die(a);
    std::string right = read_file_or_die(b);
    if (left == right) {
        std::cout << "identical (" << left.size() << " bytes)\n";
        return kExitOk;
    }
    size_t line = 1, col = 0;
    size_t n = std::min(left.size(), right.size());
    size_t i = 0;
    for (; i < n && left[i] == right[i]; ++i) {
        if (left[i] == '\n') {
            ++line;
            col = 0;
        } else {
            ++col;
        }
    }
    std::cout << "streams differ at line " << line << ", byte " << i << " (sizes "
              << left.size() << " vs " << right.size() << ")\n";
    return kExitValidation;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Scenario-driven distributed co-simulation runner"};
    app.require_subcommand(1);

    std::string scenarioPath, outDir = "scensim-out", transport = "inproc";
    std::uint16_t port = 0;
    std::string diffA, diffB;

    auto* runCmd = app.add_subcommand("run", "Run a scenario as a federation");
    runCmd->add_option("scenario", scenarioPath, "Scenario XML file")->required();
    runCmd->add_option("--transport", transport, "inproc or tcp")
        ->check(CLI::IsMember({"inproc", "tcp"}));
    runCmd->add_option("--out", outDir, "Output directory");
    runCmd->add_option("--port", port, "TCP port (0 = any free port)");

    auto* checkCmd = app.add_subcommand("check", "Validate a scenario file");
    checkCmd->add_option("scenario", scenarioPath, "Scenario XML file")->required();

    auto* fomCmd = app.add_subcommand("fom", "Generate the module files only");
    fomCmd->add_option("scenario", scenarioPath, "Scenario XML file")->required();
    fomCmd->add_option("--out", outDir, "Output directory");

    auto* refCmd = app.add_subcommand("reference", "Sequential reference run");
    refCmd->add_option("scenario", scenarioPath, "Scenario XML file")->required();
    refCmd->add_option("--out", outDir, "Output directory");

    auto* diffCmd = app.add_subcommand("diff", "Byte-compare two stream files");
    diffCmd->add_option("a", diffA, "First stream")->required();
    diffCmd->add_option("b", diffB, "Second stream")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help() << "\n";
        if (e.get_exit_code() == 0) return kExitOk; // --help
        return kExitUsage;
    }

    try {
        if (runCmd->parsed()) return do_run(scenarioPath, outDir, transport, port);
        if (checkCmd->parsed()) return do_check(scenarioPath);
        if (fomCmd->parsed()) return do_fom(scenarioPath, outDir);
        if (refCmd->parsed()) return do_reference(scenarioPath, outDir);
        if (diffCmd->parsed()) return do_diff(diffA, diffB);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace scensim
