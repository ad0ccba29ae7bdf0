#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scensim/federate.hpp"
#include "scensim/fom.hpp"
#include "scensim/observer.hpp"
#include "scensim/scenario.hpp"

namespace scensim {

struct PlannedFederate {
    std::string federate_name;
    SimulationObjectInstancePtr instance;
    FOMModule fom_module;
    std::shared_ptr<ReferenceStore> reference_store;
};

struct MasterConfig {
    FOMModule base_fom_module;
    std::string sync_point_label = "readyToRun";
};

struct RunPlan {
    Scenario scenario;
    const TypeRegistry* registry = nullptr;
    std::vector<PlannedFederate> federates; // document order
    std::vector<FOMModule> subscription_modules;
    std::vector<ObserverConfig> observer_configs;
    MasterConfig master;
    std::filesystem::path output_dir;
    double shared_step = 1.0;

    std::vector<FOMModule> all_modules() const;
    int member_count() const {
        return 1 + static_cast<int>(federates.size() + observer_configs.size());
    }
};

struct PlanOptions {
    std::filesystem::path output_dir = "scensim-out";
    bool write_fom_files = true;
};

/// Scenario file -> everything a run needs: instances, generated modules,
/// reference stores, configs, and the module files on disk.
RunPlan plan_run(const std::filesystem::path& scenarioPath, const TypeRegistry& registry,
                 const PlanOptions& options = {});

RunPlan plan_run_from_text(const std::string& document, const TypeRegistry& registry,
                           const PlanOptions& options = {});

struct RunOptions {
    enum class Transport { InProc, Tcp } transport = Transport::InProc;
    std::uint16_t port = 0; // 0 = any free port
    std::chrono::milliseconds startup_timeout{30000};
    std::chrono::milliseconds recv_timeout{30000};
    std::function<void(const char*, const std::string&, const std::string&)> audit;
    bool attach_scenario_sinks = true;
    bool write_report = true;

    /// Test hook: federate at this plan index drops its connection cold.
    std::optional<std::int64_t> drop_connection_at_step;
    std::size_t drop_connection_federate = 0;
};

struct RunReport {
    std::vector<FederateReport> federates;
    std::vector<ObserverReport> observers;
    std::vector<std::filesystem::path> observer_stream_paths;
    std::vector<std::vector<std::string>> observer_lines;
    double wall_clock_seconds = 0.0;
    bool aborted = false;
    std::vector<std::string> faults;
};

/// Starts coordinator, master, federates, and observers; runs the scenario
/// to completion; tears everything down before returning.
RunReport run_distributed(const RunPlan& plan, const RunOptions& options = {});

struct ReferenceResult {
    std::vector<std::vector<std::string>> observer_lines;
    std::map<std::string, std::map<std::string, AttributeValue>> final_attributes;
};

/// Sequential executor with the same visibility semantics as the
/// federation: behaviours at step k see peer values committed at step k-1,
/// observers see published values committed at step k. Its streams are the
/// ground truth the distributed run is checked against.
ReferenceResult run_reference(const Scenario& scenario, const TypeRegistry& registry);

/// report.json plus one JSON document per federate under `federates/`.
void write_run_report(const RunPlan& plan, const RunReport& report);

} // namespace scensim
