// Acceptance suite: one check per release criterion, one PASS/FAIL line
// each. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>

#include "scensim/fixtures.hpp"
#include "scensim/manager.hpp"
#include "support/generators.hpp"
#include "support/time_property_harness.hpp"

using namespace scensim;
using namespace scensim::testsupport;
namespace fs = std::filesystem;

namespace {

struct Checker {
    int failures = 0;

    void run(const std::string& name, const std::function<void()>& body) {
        try {
            body();
            std::cout << "[PASS] " << name << "\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "[FAIL] " << name << ": " << e.what() << "\n";
        }
        std::cout.flush();
    }
};

void require(bool condition, const std::string& what) {
    if (!condition) throw std::runtime_error(what);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string stream_bytes(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

std::string fixture_text() { return fixtures::load(fixtures::german_bight_scenario()); }

// --------------------------------------------------------------- criterion 1
void oracle_equivalence() {
    TypeRegistry reg = builtin_registry();
    std::string doc = fixture_text();

    PlanOptions planOptions;
    planOptions.output_dir = fresh_dir("scensim-acc1-inproc");
    RunPlan plan = plan_run_from_text(doc, reg, planOptions);
    ReferenceResult reference = run_reference(plan.scenario, reg);

    RunOptions inprocOptions;
    inprocOptions.attach_scenario_sinks = false;
    auto t0 = std::chrono::steady_clock::now();
    RunReport inproc = run_distributed(plan, inprocOptions);
    double inprocSeconds = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0).count();
    require(!inproc.aborted, "in-process run aborted");
    require(inproc.observer_lines.size() == 1, "expected one observer stream");
    require(stream_bytes(inproc.observer_lines[0]) == stream_bytes(reference.observer_lines[0]),
            "in-process stream differs from the sequential reference");
    require(inprocSeconds < 10.0,
            "in-process run took " + std::to_string(inprocSeconds) + " s (budget 10 s)");

    PlanOptions tcpPlanOptions;
    tcpPlanOptions.output_dir = fresh_dir("scensim-acc1-tcp");
    RunPlan tcpPlan = plan_run_from_text(doc, reg, tcpPlanOptions);
    RunOptions tcpOptions;
    tcpOptions.transport = RunOptions::Transport::Tcp;
    tcpOptions.attach_scenario_sinks = false;
    t0 = std::chrono::steady_clock::now();
    RunReport tcp = run_distributed(tcpPlan, tcpOptions);
    double tcpSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(!tcp.aborted, "tcp run aborted");
    require(stream_bytes(tcp.observer_lines[0]) == stream_bytes(reference.observer_lines[0]),
            "tcp stream differs from the sequential reference");
    require(tcpSeconds < 30.0,
            "tcp run took " + std::to_string(tcpSeconds) + " s (budget 30 s)");
}

// --------------------------------------------------------------- criterion 2
void determinism() {
    TypeRegistry reg = builtin_registry();
    std::string doc = fixture_text();
    fs::path dirA = fresh_dir("scensim-acc2-a");
    fs::path dirB = fresh_dir("scensim-acc2-b");

    RunOptions quiet;
    quiet.attach_scenario_sinks = false;
    PlanOptions optionsA;
    optionsA.output_dir = dirA;
    RunReport runA = run_distributed(plan_run_from_text(doc, reg, optionsA), quiet);
    PlanOptions optionsB;
    optionsB.output_dir = dirB;
    RunReport runB = run_distributed(plan_run_from_text(doc, reg, optionsB), quiet);
    require(!runA.aborted && !runB.aborted, "a run aborted");

    require(slurp(dirA / "observer-0.ndjson") == slurp(dirB / "observer-0.ndjson"),
            "observer streams differ between consecutive runs");
    for (const char* name : {"base.xml", "obj-0001.xml", "obj-0002.xml"})
        require(slurp(dirA / "fom" / name) == slurp(dirB / "fom" / name),
                std::string("module file differs between runs: ") + name);
}

// --------------------------------------------------------------- criterion 3
void fom_golden() {
    TypeRegistry reg = builtin_registry();
    std::string doc = fixture_text();
    Scenario scenario = parse_scenario(doc, reg);
    auto instance = instantiate(reg, scenario.simulation_objects[0], 1);
    FOMModule module = generate_fom_module(*instance, reg);
    std::string rendered = render_fom_xml(module);
    require(rendered == fixtures::load(fixtures::german_bight_golden_fom()),
            "rendered module differs from the committed golden file");

    require(module.root.name == "HLAObjectRoot", "root class name");
    const FOMObjectClass* sim = &module.root.children.front();
    require(sim->name == "SimulationObject", "second level class name");
    bool latFound = false;
    for (const auto& attr : sim->attributes) {
        if (attr.name != "position.latitude") continue;
        latFound = true;
        require(attr.data_type == DataType::Double, "position.latitude must be Double");
        require(attr.update_type == "Unconditional", "updateType marker");
        require(attr.ownership == "NoTransfer", "ownership marker");
    }
    require(latFound, "flattened position.latitude missing");
    const FOMObjectClass* cls = &module.root;
    while (!cls->children.empty()) {
        cls = &cls->children.front();
        if (cls->name == "DynamicSimulationObject" || cls->name == "ActiveSimulationObject")
            require(cls->sharing == Sharing::Neither,
                    cls->name + " must not share anything in this scenario");
    }
}

// --------------------------------------------------------------- criterion 4
void time_management_properties() {
    int schedules = 200;
    int ran = 0;
    for (std::uint64_t seed = 1; ran < schedules; ++seed, ++ran) {
        TimePropertyConfig cfg;
        cfg.schedule_seed = 0x9e3779b97f4a7c15ull * (seed + 1);
        cfg.federates = 3;
        cfg.steps = 50;
        if (seed % 3 == 0) cfg.step_sizes = {0.5, 1.0, 0.5};
        if (seed % 7 == 0) cfg.step_sizes = {0.5, 0.25, 1.0};
        std::string violation = run_time_property_schedule(cfg);
        require(violation.empty(),
                "schedule " + std::to_string(seed) + ": " + violation);
    }
}

// --------------------------------------------------------------- criterion 5
void publish_flag_wall() {
    TypeRegistry reg = builtin_registry();
    std::string doc = fixture_text();
    // Keep the observer's subscription to speed, but publish it nowhere.
    size_t pos = 0;
    int flips = 0;
    while ((pos = doc.find("<speed>", pos)) != std::string::npos) {
        size_t end = doc.find("</speed>", pos);
        size_t flag = doc.find("<publish>true</publish>", pos);
        require(flag != std::string::npos && flag < end, "fixture shape changed");
        doc.replace(flag, std::strlen("<publish>true</publish>"),
                    "<publish>false</publish>");
        ++flips;
        pos = end;
    }
    require(flips == 2, "expected to unpublish two speed attributes");

    const std::string speedPath =
        "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
        "TrafficParticipant.speed";
    std::mutex framesMutex;
    std::vector<std::string> frames;

    PlanOptions planOptions;
    planOptions.output_dir = fresh_dir("scensim-acc5");
    RunPlan plan = plan_run_from_text(doc, reg, planOptions);
    RunOptions options;
    options.attach_scenario_sinks = false;
    options.audit = [&](const char*, const std::string&, const std::string& frame) {
        std::lock_guard<std::mutex> lock(framesMutex);
        frames.push_back(frame);
    };
    RunReport report = run_distributed(plan, options);
    require(!report.aborted, "run aborted");
    require(!frames.empty(), "audit saw no traffic");

    for (const auto& frame : frames) {
        require(frame.find(speedPath) == std::string::npos,
                "a frame carries the speed attribute path");
        RtiMessage msg = RtiMessage::from_frame(frame);
        if (msg.payload.contains("values"))
            for (auto it = msg.payload.at("values").begin();
                 it != msg.payload.at("values").end(); ++it)
                require(it.key().find(".speed") == std::string::npos &&
                            it.key() != "speed",
                        "a value map carries a speed entry");
    }
    for (const auto& line : report.observer_lines[0])
        require(line.find("\"speed\"") == std::string::npos,
                "an observer record carries speed");

    // The sequential reference agrees on the redacted stream.
    ReferenceResult reference = run_reference(plan.scenario, reg);
    require(stream_bytes(report.observer_lines[0]) ==
                stream_bytes(reference.observer_lines[0]),
            "redacted streams differ between run and reference");
}

// --------------------------------------------------------------- criterion 6
void round_trips() {
    TypeRegistry reg = builtin_registry();
    ScenarioGenerator scenarios(reg, 0xacc6);
    for (int i = 0; i < 100; ++i) {
        Scenario s = scenarios.generate();
        Scenario back = parse_scenario(serialize_scenario(s), reg);
        require(back == s, "scenario round trip failed at sample " + std::to_string(i));
    }
    FomGenerator modules(0xacc6f0);
    for (int i = 0; i < 100; ++i) {
        FOMModule m = modules.generate();
        FOMModule back = parse_fom_xml(render_fom_xml(m));
        require(back == m, "module round trip failed at sample " + std::to_string(i));
    }
}

// --------------------------------------------------------------- criterion 7
void kinematics_closed_form() {
    constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
    const double lat = 53.55;
    const double speed = kMetersPerDegreeLatitude * std::cos(lat * kDegToRad);
    const double dt = 0.001;
    Route route{{{lat, 8.66, 0.0}}};
    Position p{lat, 8.55, 0.0};
    std::size_t cursor = 0;
    double traveled = 0.0;
    for (int k = 1; k <= 100; ++k) {
        Position before = p;
        RouteAdvance out = advance_along_route(p, route, cursor, speed, dt, 90.0);
        double stepLon = out.position.longitude - before.longitude;
        require(std::abs(stepLon - 0.001) < 1e-12,
                "step " + std::to_string(k) + " advanced " + std::to_string(stepLon) +
                    " degrees of longitude");
        require(out.position.latitude == before.latitude, "latitude drifted on a due-east leg");
        double north = (out.position.latitude - before.latitude) * kMetersPerDegreeLatitude;
        double east = (out.position.longitude - before.longitude) * kMetersPerDegreeLatitude *
                      std::cos(before.latitude * kDegToRad);
        traveled += std::hypot(east, north);
        double expected = k * speed * dt;
        require(std::abs(traveled - expected) / expected < 1e-9,
                "cumulative distance off at step " + std::to_string(k));
        p = out.position;
        cursor = out.cursor;
    }
}

// --------------------------------------------------------------- criterion 8
void behaviour_visibility() {
    TypeRegistry reg = builtin_registry();
    const int iterations = 25;
    std::string doc = R"(<?xml version="1.0" encoding="UTF-8"?>
<scenario xmlns="http://uol.de/mdts/schema/base" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance">
  <library><name>maritime_library</name><version>1.0-SNAPSHOT</version></library>
  <simulationIterations>)" + std::to_string(iterations) + R"(</simulationIterations>
  <simulationObjects>
    <simulationObject xsi:type="containerShip">
      <behaviour xsi:type="simpleFollowRouteBehaviour">
        <route>
          <position><latitude>53.7</latitude><longitude>8.4</longitude><altitude>0</altitude></position>
          <position><latitude>53.9</latitude><longitude>8.2</longitude><altitude>0</altitude></position>
        </route>
      </behaviour>
      <timeStepSize>1</timeStepSize>
      <position><dataType>Position</dataType><name>position</name><publish>true</publish>
        <value><latitude>53.55</latitude><longitude>8.55</longitude><altitude>0</altitude></value></position>
      <speed><dataType>java.lang.Double</dataType><name>speed</name><publish>false</publish><value>9</value></speed>
    </simulationObject>
    <simulationObject xsi:type="generalCargo">
      <behaviour xsi:type="copyObservedPositionBehaviour"/>
      <timeStepSize>1</timeStepSize>
      <formString><dataType>String</dataType><name>formString</name><publish>true</publish><value></value></formString>
      <observedClasses>
        <observedClass>
          <type>containerShip</type>
          <attributes><attribute>position</attribute></attributes>
        </observedClass>
      </observedClasses>
    </simulationObject>
  </simulationObjects>
  <observers>
    <observer>
      <observedClasses>
        <observedClass>
          <type>vessel</type>
          <attributes><attribute>position</attribute><attribute>formString</attribute></attributes>
        </observedClass>
      </observedClasses>
      <timeStepSize>1</timeStepSize>
    </observer>
  </observers>
</scenario>
)";
    Scenario scenario = parse_scenario(doc, reg);
    ReferenceResult reference = run_reference(scenario, reg);

    PlanOptions planOptions;
    planOptions.output_dir = fresh_dir("scensim-acc8");
    RunPlan plan = plan_run_from_text(doc, reg, planOptions);
    RunOptions quiet;
    quiet.attach_scenario_sinks = false;
    RunReport report = run_distributed(plan, quiet);
    require(!report.aborted, "run aborted");
    require(stream_bytes(report.observer_lines[0]) ==
                stream_bytes(reference.observer_lines[0]),
            "copy scenario: run and reference disagree");

    // The copied text at step k is exactly the leader's position at k-1.
    std::map<int, std::string> leaderPosition, copies;
    for (const auto& line : reference.observer_lines[0]) {
        auto j = nlohmann::json::parse(line);
        int step = j.at("step").get<int>();
        if (j.at("objectUUID") == "obj-0001") {
            const auto& p = j.at("attributes").at("position");
            leaderPosition[step] = render_position_json(Position{p.at("Lat").get<double>(),
                                                                 p.at("Lon").get<double>(),
                                                                 p.at("Alt").get<double>()});
        }
        if (j.at("objectUUID") == "obj-0002" && j.at("attributes").contains("formString"))
            copies[step] = j.at("attributes").at("formString").get<std::string>();
    }
    for (int k = 2; k <= iterations; ++k) {
        require(copies.count(k), "no copy record at step " + std::to_string(k));
        require(leaderPosition.count(k - 1), "no leader record at step " + std::to_string(k - 1));
        require(copies.at(k) == leaderPosition.at(k - 1),
                "copy at step " + std::to_string(k) + " is not the leader's step " +
                    std::to_string(k - 1) + " position");
    }
}

// --------------------------------------------------------------- criterion 9
int live_thread_count() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("Threads:", 0) == 0) return std::stoi(line.substr(8));
    return -1;
}

void clean_teardown() {
    TypeRegistry reg = builtin_registry();
    std::string doc = fixture_text();
    size_t pos = doc.find("<simulationIterations>1000</simulationIterations>");
    require(pos != std::string::npos, "fixture shape changed");
    doc.replace(pos, std::strlen("<simulationIterations>1000</simulationIterations>"),
                "<simulationIterations>10</simulationIterations>");

    std::uint16_t port = static_cast<std::uint16_t>(45100 + (::getpid() % 400));
    int baseline = live_thread_count();
    for (int i = 0; i < 20; ++i) {
        PlanOptions planOptions;
        planOptions.output_dir = fresh_dir("scensim-acc9");
        RunPlan plan = plan_run_from_text(doc, reg, planOptions);
        RunOptions options;
        options.transport = RunOptions::Transport::Tcp;
        options.attach_scenario_sinks = false;
        options.port = port;
        RunReport report = run_distributed(plan, options);
        require(!report.aborted, "tcp run " + std::to_string(i) + " aborted");
    }
    require(live_thread_count() == baseline,
            "thread count did not return to baseline after 20 runs");
    // The port is free again right away.
    TcpServerEndpoint probe(port);
    probe.shutdown();
}

} // namespace

int main() {
    Checker checker;
    checker.run("1. oracle equivalence: run == reference, both transports", oracle_equivalence);
    checker.run("2. determinism: consecutive runs are byte-identical", determinism);
    checker.run("3. module golden file and structural markers", fom_golden);
    checker.run("4. time management properties over 200 randomized schedules",
                time_management_properties);
    checker.run("5. publish-flag wall: unpublished values never hit the wire",
                publish_flag_wall);
    checker.run("6. round trips: 100 scenarios and 100 modules", round_trips);
    checker.run("7. kinematics closed form on a due-east leg", kinematics_closed_form);
    checker.run("8. behaviour visibility lags one step behind the publisher",
                behaviour_visibility);
    checker.run("9. clean teardown across 20 consecutive tcp runs", clean_teardown);
    if (checker.failures > 0) {
        std::cout << checker.failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
