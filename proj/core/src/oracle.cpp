#include "rider/oracle.hpp"

#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace rider::oracle {

namespace fs = std::filesystem;

void HelixOracleParams::validate() const {
  for (double r : rise)
    if (!(r > 0.0)) throw ConfigError("helix oracle rises must be positive");
  for (double t : twist_deg)
    if (!(t > 0.0 && t < 90.0)) throw ConfigError("helix oracle twists must lie in (0, 90) deg");
}

io::BackboneStructure helix_fold(const HelixOracleParams& params, const std::string& letters) {
  if (letters.empty()) throw AlphabetError("cannot fold an empty sequence");
  io::BackboneStructure s;
  s.chain_id = "A";
  s.source = "oracle";
  s.residues.reserve(letters.size());

  double theta = 0.0;  // accumulated twist, radians
  double z = 0.0;      // accumulated rise
  for (char letter : letters) {
    const int b = static_cast<int>(io::char_to_base(letter));
    Eigen::Matrix3d rot;
    rot = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ());
    const Eigen::Vector3d axis_point(0.0, 0.0, z);
    s.residues.push_back(io::ResidueAtoms::make(
        static_cast<io::Base>(b), axis_point + rot * params.p_offset[static_cast<std::size_t>(b)],
        axis_point + rot * params.c4p_offset[static_cast<std::size_t>(b)],
        axis_point + rot * params.n_offset[static_cast<std::size_t>(b)]));
    theta += params.twist_deg[static_cast<std::size_t>(b)] * M_PI / 180.0;
    z += params.rise[static_cast<std::size_t>(b)];
  }
  return s;
}

namespace {

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = tmpl.find(key, pos)) != std::string::npos) {
    tmpl.replace(pos, key.size(), value);
    pos += value.size();
  }
  return tmpl;
}

/// Working directory removed on destruction, whatever the exit path.
struct ScopedDir {
  fs::path path;
  explicit ScopedDir(fs::path p) : path(std::move(p)) { fs::create_directories(path); }
  ~ScopedDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct RunResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string stderr_excerpt;
};

RunResult run_with_timeout(const std::string& command, const fs::path& stderr_path,
                           double timeout_s) {
  const pid_t pid = fork();
  if (pid < 0) throw OracleError("fork failed: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    // Child: own process group so the watchdog can kill the whole tree.
    setpgid(0, 0);
    FILE* err = std::fopen(stderr_path.c_str(), "w");
    if (err) {
      dup2(fileno(err), STDERR_FILENO);
      std::fclose(err);
    }
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  RunResult res;
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  int status = 0;
  while (true) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw OracleError("waitpid failed: " + std::string(std::strerror(errno)));
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      res.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (!res.timed_out)
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);

  std::ifstream err(stderr_path);
  if (err) {
    std::string text((std::istreambuf_iterator<char>(err)), std::istreambuf_iterator<char>());
    res.stderr_excerpt = text.substr(0, 400);
  }
  return res;
}

std::atomic<unsigned long> g_invocation_counter{0};

}  // namespace

io::BackboneStructure subprocess_fold(const SubprocessOracleConfig& cfg,
                                      const std::string& letters) {
  if (cfg.cmd_template.find("{fasta}") == std::string::npos ||
      cfg.cmd_template.find("{out_pdb}") == std::string::npos)
    throw OracleError("command template must contain {fasta} and {out_pdb} placeholders");

  const unsigned long id = g_invocation_counter.fetch_add(1);
  ScopedDir dir(fs::path(cfg.workdir) /
                ("fold_" + std::to_string(::getpid()) + "_" + std::to_string(id)));
  const fs::path fasta = dir.path / "in.fasta";
  const fs::path out_pdb = dir.path / "out.pdb";
  const fs::path stderr_path = dir.path / "stderr.txt";

  {
    std::ofstream f(fasta);
    if (!f) throw OracleError("cannot write " + fasta.string());
    f << io::to_fasta("design", letters);
  }

  std::string command = substitute(cfg.cmd_template, "{fasta}", fasta.string());
  command = substitute(command, "{out_pdb}", out_pdb.string());

  const RunResult run = run_with_timeout(command, stderr_path, cfg.timeout_s);
  if (run.timed_out)
    throw OracleError("folding command timed out after " + std::to_string(cfg.timeout_s) + " s");
  if (run.exit_code != 0)
    throw OracleError("folding command exited with " + std::to_string(run.exit_code) +
                      (run.stderr_excerpt.empty() ? "" : ("; stderr: " + run.stderr_excerpt)));

  std::ifstream out(out_pdb);
  if (!out)
    throw OracleError("folding command produced no output file" +
                      (run.stderr_excerpt.empty() ? "" : ("; stderr: " + run.stderr_excerpt)));
  std::string text((std::istreambuf_iterator<char>(out)), std::istreambuf_iterator<char>());
  try {
    return io::parse_pdb_backbone(text, "oracle").structure;
  } catch (const ParseError& e) {
    throw OracleError("folding output unparseable: " + std::string(e.what()) +
                      (run.stderr_excerpt.empty() ? "" : ("; stderr: " + run.stderr_excerpt)));
  }
}

struct SubprocessOracle::Pool {
  std::mutex mu;
  std::condition_variable cv;
  int available = 1;
};

SubprocessOracle::SubprocessOracle(SubprocessOracleConfig cfg)
    : cfg_(std::move(cfg)), pool_(std::make_unique<Pool>()) {
  if (cfg_.pool_size < 1) throw ConfigError("subprocess oracle pool size must be >= 1");
  pool_->available = cfg_.pool_size;
}

SubprocessOracle::~SubprocessOracle() = default;

io::BackboneStructure SubprocessOracle::fold(const std::string& letters) const {
  {
    std::unique_lock<std::mutex> lock(pool_->mu);
    pool_->cv.wait(lock, [this] { return pool_->available > 0; });
    --pool_->available;
  }
  try {
    io::BackboneStructure s = subprocess_fold(cfg_, letters);
    {
      std::lock_guard<std::mutex> lock(pool_->mu);
      ++pool_->available;
    }
    pool_->cv.notify_one();
    return s;
  } catch (...) {
    {
      std::lock_guard<std::mutex> lock(pool_->mu);
      ++pool_->available;
    }
    pool_->cv.notify_one();
    throw;
  }
}

Task make_task(const HelixOracleParams& params, const std::string& native_seq,
               const std::string& id) {
  if (native_seq.size() < 4)
    throw ConfigError("task sequences must have length >= 4 so the metrics are defined");
  Task t;
  t.native = io::sequence_to_onehot(native_seq);
  t.target = helix_fold(params, native_seq);
  t.id = id.empty() ? ("task_" + native_seq.substr(0, 8)) : id;
  return t;
}

}  // namespace rider::oracle
