#include "mcdcert/response.hpp"

#include "mcdcert/error.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <csignal>
#include <cstring>
#include <future>
#include <mutex>
#include <optional>
#include <thread>
#include <semaphore>
#include <sstream>
#include <unordered_map>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace mcdcert {

// ---------------------------------------------------------------------------
// Expression backend

ExpressionBackend::ExpressionBackend(expr::Expression e, std::span<const std::string> names)
    : bound_(std::move(e), names) {}

std::string ExpressionBackend::describe() const { return "expression " + expr::to_string(bound_.expression()); }

// ---------------------------------------------------------------------------
// Command backend

struct CommandBackend::Gate {
    explicit Gate(std::size_t n) : slots(static_cast<std::ptrdiff_t>(n)) {}
    std::counting_semaphore<4096> slots;
};

namespace {

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        struct sigaction sa {};
        sa.sa_handler = SIG_IGN;
        sigemptyset(&sa.sa_mask);
        sigaction(SIGPIPE, &sa, nullptr);
    });
}

std::string format_input_line(std::span<const double> x) {
    std::string line;
    std::array<char, 64> buf{};
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i > 0) line += ' ';
        auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x[i], std::chars_format::general, 17);
        line.append(buf.data(), ptr);
    }
    line += '\n';
    return line;
}

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    void reset() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
};

[[noreturn]] void command_failure(const std::string& what, std::span<const double> x) {
    throw EvaluationError("command evaluation failed: " + what, std::vector<double>(x.begin(), x.end()));
}

}  // namespace

CommandBackend::CommandBackend(std::vector<std::string> argv, std::size_t max_parallel)
    : argv_(std::move(argv)),
      gate_(std::make_unique<Gate>(std::clamp<std::size_t>(
          max_parallel == 0 ? std::max(1U, std::thread::hardware_concurrency()) : max_parallel, 1, 4096))) {
    if (argv_.empty() || argv_[0].empty()) throw InvalidArgument("command backend needs a program to run");
    ignore_sigpipe_once();
}

CommandBackend::~CommandBackend() = default;

std::string CommandBackend::describe() const {
    std::string out = "command";
    for (const auto& a : argv_) out += " " + a;
    return out;
}

double CommandBackend::evaluate(std::span<const double> x) const {
    gate_->slots.acquire();
    struct Release {
        Gate& g;
        ~Release() { g.slots.release(); }
    } release{*gate_};

    int in_fds[2];
    int out_fds[2];
    if (::pipe2(in_fds, O_CLOEXEC) != 0) command_failure(std::strerror(errno), x);
    Fd in_read(in_fds[0]), in_write(in_fds[1]);
    if (::pipe2(out_fds, O_CLOEXEC) != 0) command_failure(std::strerror(errno), x);
    Fd out_read(out_fds[0]), out_write(out_fds[1]);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_read.fd, STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_write.fd, STDOUT_FILENO);

    std::vector<char*> args;
    for (const auto& a : argv_) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_t pid = 0;
    const int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) command_failure("cannot start '" + argv_[0] + "': " + std::strerror(rc), x);
    in_read.reset();
    out_write.reset();

    const std::string line = format_input_line(x);
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t k = ::write(in_write.fd, line.data() + written, line.size() - written);
        if (k < 0) {
            if (errno == EINTR) continue;
            break;  // child closed stdin early; its exit status decides
        }
        written += static_cast<std::size_t>(k);
    }
    in_write.reset();

    std::string output;
    std::array<char, 4096> buf{};
    for (;;) {
        const ssize_t k = ::read(out_read.fd, buf.data(), buf.size());
        if (k < 0 && errno == EINTR) continue;
        if (k <= 0) break;
        output.append(buf.data(), static_cast<std::size_t>(k));
    }
    out_read.reset();

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) command_failure("waitpid failed", x);
    }
    if (!WIFEXITED(status)) command_failure("'" + argv_[0] + "' terminated abnormally", x);
    if (WEXITSTATUS(status) != 0) {
        command_failure("'" + argv_[0] + "' exited with status " + std::to_string(WEXITSTATUS(status)), x);
    }

    std::string_view first(output);
    first = first.substr(0, first.find('\n'));
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!first.empty() && is_space(first.front())) first.remove_prefix(1);
    while (!first.empty() && is_space(first.back())) first.remove_suffix(1);
    if (!first.empty() && first.front() == '+') first.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first.data(), first.data() + first.size(), value);
    if (first.empty() || ec != std::errc{} || ptr != first.data() + first.size() || !std::isfinite(value)) {
        command_failure("unparsable output line '" + std::string(first) + "'", x);
    }
    return value;
}

// ---------------------------------------------------------------------------
// Builtins

LinearBackend::LinearBackend(std::vector<double> weights, double offset)
    : weights_(std::move(weights)), offset_(offset) {
    if (weights_.empty()) throw InvalidArgument("linear builtin needs at least one weight");
}

double LinearBackend::evaluate(std::span<const double> x) const {
    double s = offset_;
    for (std::size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i];
    return s;
}

double ProductBackend::evaluate(std::span<const double> x) const {
    double p = 1.0;
    for (double v : x) p *= v;
    return p;
}

InteractionBackend::InteractionBackend(std::vector<double> weights, double coupling)
    : weights_(std::move(weights)), coupling_(coupling) {
    if (weights_.empty()) throw InvalidArgument("interaction builtin needs at least one weight");
}

double InteractionBackend::evaluate(std::span<const double> x) const {
    double s = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += weights_[i] * x[i];
        for (std::size_t j = i + 1; j < x.size(); ++j) pairs += x[i] * x[j];
    }
    return s + coupling_ * pairs;
}

// ---------------------------------------------------------------------------
// ResponseFunction

namespace {

struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>& k) const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::uint64_t w : k) {
            h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

struct ResponseFunction::State {
    std::optional<BoxDomain> domain;
    std::shared_ptr<const Backend> backend;
    ResponseOptions options;
    std::vector<double> tolerance;
    mutable std::mutex mu;
    mutable std::unordered_map<std::vector<std::uint64_t>, std::shared_future<double>, KeyHash> cache;
    mutable std::atomic<std::uint64_t> evals{0};
};

ResponseFunction::ResponseFunction(BoxDomain domain, std::shared_ptr<const Backend> backend, ResponseOptions options)
    : state_(std::make_unique<State>()) {
    state_->domain.emplace(std::move(domain));
    state_->backend = std::move(backend);
    state_->options = options;
    if (!state_->backend) throw InvalidArgument("response function needs a backend");
    const std::size_t arity = state_->backend->arity();
    if (arity != 0 && arity != state_->domain->size()) {
        throw InvalidArgument("backend expects " + std::to_string(arity) + " inputs but the domain declares " +
                              std::to_string(state_->domain->size()));
    }
    for (const auto& in : state_->domain->inputs()) {
        state_->tolerance.push_back(1e-12 * std::max(std::fabs(in.lo), std::fabs(in.hi)));
    }
}

ResponseFunction::~ResponseFunction() = default;
ResponseFunction::ResponseFunction(ResponseFunction&&) noexcept = default;
ResponseFunction& ResponseFunction::operator=(ResponseFunction&&) noexcept = default;

const BoxDomain& ResponseFunction::domain() const noexcept { return *state_->domain; }
const Backend& ResponseFunction::backend() const noexcept { return *state_->backend; }
std::uint64_t ResponseFunction::eval_count() const noexcept { return state_->evals.load(); }

std::size_t ResponseFunction::cache_size() const {
    std::lock_guard lock(state_->mu);
    return state_->cache.size();
}

double ResponseFunction::eval_at(std::span<const double> x) const {
    const BoxDomain& d = *state_->domain;
    if (x.size() != d.size()) {
        throw InvalidArgument("expected " + std::to_string(d.size()) + " inputs, got " + std::to_string(x.size()));
    }
    Point p(x.begin(), x.end());
    std::vector<std::uint64_t> key(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& in = d[i];
        if (!(p[i] >= in.lo - state_->tolerance[i] && p[i] <= in.hi + state_->tolerance[i])) {
            std::ostringstream os;
            os.precision(17);
            os << "input '" << in.name << "' = " << p[i] << " lies outside [" << in.lo << ", " << in.hi << "]";
            throw InvalidArgument(os.str());
        }
        p[i] = std::clamp(p[i], in.lo, in.hi);
        std::memcpy(&key[i], &p[i], sizeof(double));
    }

    std::promise<double> promise;
    std::shared_future<double> future;
    bool owner = false;
    {
        std::lock_guard lock(state_->mu);
        auto it = state_->cache.find(key);
        if (it != state_->cache.end()) {
            future = it->second;
        } else {
            owner = true;
            future = promise.get_future().share();
            if (state_->cache.size() < state_->options.cache_limit) state_->cache.emplace(key, future);
        }
    }
    if (!owner) return future.get();

    state_->evals.fetch_add(1);
    try {
        promise.set_value(state_->backend->evaluate(p));
    } catch (...) {
        // Failures are not memoized; waiters see the error, later calls retry.
        promise.set_exception(std::current_exception());
        std::lock_guard lock(state_->mu);
        auto it = state_->cache.find(key);
        if (it != state_->cache.end()) state_->cache.erase(it);
    }
    return future.get();
}

ResponseFunction make_expression_function(BoxDomain domain, std::string_view text, ResponseOptions options) {
    const auto names = domain.names();
    auto backend = std::make_shared<ExpressionBackend>(expr::parse(text), names);
    return ResponseFunction(std::move(domain), std::move(backend), options);
}

}  // namespace mcdcert
