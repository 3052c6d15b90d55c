#include "semslam/sweep.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace semslam {

namespace {

struct SweepCell {
    MethodKind method;
    std::uint64_t seed;
    double odom_scale;
    double misclass_rate;
};

}  // namespace

std::vector<RunSummary> run_sweep(const SweepConfig& config, const std::string& out_path) {
    std::vector<SweepCell> cells;
    for (double scale : config.odom_scales) {
        for (double rate : config.misclass_rates) {
            for (int s = 0; s < config.num_seeds; ++s) {
                for (MethodKind method : config.methods) {
                    cells.push_back({method, config.base_sim.seed + static_cast<std::uint64_t>(s),
                                     scale, rate});
                }
            }
        }
    }

    std::vector<RunSummary> summaries(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;

    const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
    const unsigned num_threads =
        config.num_threads > 0 ? static_cast<unsigned>(config.num_threads) : hardware;

    auto worker = [&]() {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= cells.size()) {
                return;
            }
            const SweepCell& cell = cells[index];
            SimConfig sim = config.base_sim;
            sim.seed = cell.seed;
            sim.odom_scale = cell.odom_scale;
            sim.misclass_rate = cell.misclass_rate;
            const Dataset dataset = simulate(generate_world(sim), sim);
            const RunResult result = run(dataset, cell.method, config.pipeline);
            summaries[index] =
                summarize_run(result, dataset, cell.seed, cell.odom_scale, cell.misclass_rate);
            if (!out_path.empty()) {
                const std::string line = summary_to_json(summaries[index]);
                std::lock_guard<std::mutex> lock(io_mutex);
                append_jsonl(out_path, line);
            }
        }
    };

    std::vector<std::thread> threads;
    for (unsigned i = 1; i < num_threads; ++i) {
        threads.emplace_back(worker);
    }
    worker();
    for (std::thread& thread : threads) {
        thread.join();
    }
    return summaries;
}

}  // namespace semslam
