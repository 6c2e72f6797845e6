#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "qksvm/error.hpp"
#include "qksvm/parallel.hpp"

namespace qksvm {

namespace {

void stderr_handler(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

std::mutex g_warn_mutex;
std::set<std::string> g_warned;
std::atomic<WarningHandler> g_handler{&stderr_handler};

}  // namespace

void warn_once(const std::string& key, const std::string& message) {
    {
        std::lock_guard<std::mutex> lock(g_warn_mutex);
        if (!g_warned.insert(key).second) return;
    }
    if (auto handler = g_handler.load()) handler(message);
}

WarningHandler set_warning_handler(WarningHandler handler) { return g_handler.exchange(handler); }

int default_jobs() {
    if (const char* env = std::getenv("QKSVM_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    if (jobs <= 0) jobs = default_jobs();
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace qksvm
