#include "abfield/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace abfield {

namespace {

thread_local bool inside_worker = false;

// Long-lived pool sized to the hardware; worker_limit() caps how many
// workers participate in any one batch.
class Pool {
public:
    static Pool& instance() {
        static Pool pool;
        return pool;
    }

    void run(std::size_t n, std::size_t max_workers, const std::function<void(std::size_t)>& fn) {
        std::unique_lock<std::mutex> lock(mutex_);
        job_ = &fn;
        job_size_ = n;
        cursor_.store(0, std::memory_order_relaxed);
        active_ = 0;
        error_ = nullptr;
        const std::size_t helpers =
            std::min(max_workers > 0 ? max_workers - 1 : 0, threads_.size());
        wanted_ = helpers;
        generation_++;
        lock.unlock();
        cv_.notify_all();

        work(fn, n);

        lock.lock();
        done_cv_.wait(lock, [&] { return active_ == 0; });
        job_ = nullptr;
        if (error_) std::rethrow_exception(error_);
    }

private:
    Pool() {
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        for (unsigned i = 0; i + 1 < hw; ++i)
            threads_.emplace_back([this, i] { worker_loop(i); });
    }

    ~Pool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    void worker_loop(unsigned id) {
        inside_worker = true;
        std::uint64_t seen = 0;
        for (;;) {
            std::unique_lock<std::mutex> lock(mutex_);
            cv_.wait(lock, [&] { return stop_ || (generation_ != seen && id < wanted_); });
            if (stop_) return;
            seen = generation_;
            if (!job_) continue;
            active_++;
            const auto* job = job_;
            const std::size_t n = job_size_;
            lock.unlock();

            work(*job, n);

            lock.lock();
            if (--active_ == 0) done_cv_.notify_all();
        }
    }

    void work(const std::function<void(std::size_t)>& fn, std::size_t n) {
        const std::size_t chunk = std::max<std::size_t>(1, n / 64);
        for (;;) {
            const std::size_t begin = cursor_.fetch_add(chunk, std::memory_order_relaxed);
            if (begin >= n) break;
            const std::size_t end = std::min(begin + chunk, n);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mutex_);
                if (!error_) error_ = std::current_exception();
                cursor_.store(n, std::memory_order_relaxed);
                break;
            }
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t)>* job_ = nullptr;
    std::size_t job_size_ = 0;
    std::atomic<std::size_t> cursor_{0};
    std::size_t wanted_ = 0;
    std::size_t active_ = 0;
    std::uint64_t generation_ = 0;
    std::exception_ptr error_;
    bool stop_ = false;
};

} // namespace

std::size_t worker_limit() {
    if (const char* env = std::getenv("ABFIELD_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<std::size_t>(v);
        return 1;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_apply(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = worker_limit();
    if (inside_worker || workers <= 1 || n < 256) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    Pool::instance().run(n, workers, fn);
}

} // namespace abfield
