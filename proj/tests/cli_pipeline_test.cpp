// Drives the real CLI binary through the full lifecycle in a temp directory:
// gen-data -> build-dataset -> select-features -> train -> simulate ->
// ab-test (twice, byte-identical) -> replay -> serve over stdio.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef __unix__
#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>
#endif

namespace fs = std::filesystem;

namespace {

int checks = 0, failures = 0;

void expect(bool ok, const std::string& what) {
  ++checks;
  if (!ok) {
    ++failures;
    std::cerr << "FAIL: " << what << "\n";
  }
}

int run(const std::string& cmd) {
  std::cout << "$ " << cmd << "\n";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

#ifdef __unix__
// Minimal line-protocol client: connect (with retries while the server
// starts), send each line, read one response line per request.
std::vector<std::string> tcp_roundtrip(int port, const std::vector<std::string>& lines) {
  int fd = -1;
  for (int attempt = 0; attempt < 50; ++attempt) {
    fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(static_cast<std::uint16_t>(port));
    ::inet_pton(AF_INET, "127.0.0.1", &sa.sin_addr);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0) break;
    ::close(fd);
    fd = -1;
    ::usleep(100000);
  }
  std::vector<std::string> responses;
  if (fd < 0) return responses;
  std::string buffer;
  char chunk[4096];
  for (const auto& line : lines) {
    std::string payload = line + "\n";
    std::size_t off = 0;
    while (off < payload.size()) {
      ssize_t w = ::write(fd, payload.data() + off, payload.size() - off);
      if (w <= 0) break;
      off += static_cast<std::size_t>(w);
    }
    std::size_t nl;
    while ((nl = buffer.find('\n')) == std::string::npos) {
      ssize_t n = ::read(fd, chunk, sizeof(chunk));
      if (n <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
    if (nl == std::string::npos) break;
    responses.push_back(buffer.substr(0, nl));
    buffer.erase(0, nl + 1);
  }
  ::close(fd);
  return responses;
}
#endif

}  // namespace

int main() {
  const std::string cli = SMARTROUTE_CLI_PATH;
  const std::string cfg = std::string(SMARTROUTE_CONFIG_DIR) + "/app.json";
  const std::string scenario = std::string(SMARTROUTE_CONFIG_DIR) + "/training.json";
  const std::string eval_scenario = std::string(SMARTROUTE_CONFIG_DIR) + "/heterogeneous.json";

  fs::path work = fs::temp_directory_path() / "smartroute_cli_pipeline";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string w = work.string();
  const std::string base = cli + " --config " + cfg + " ";

  expect(run(base + "gen-data --scenario " + scenario + " --out " + w + "/explore --payments 6000") == 0,
         "gen-data exits 0");
  expect(fs::exists(work / "explore/transactions.jsonl"), "gen-data writes a transaction log");

  expect(run(base + "build-dataset --log " + w + "/explore/transactions.jsonl --out " + w + "/ds") == 0,
         "build-dataset exits 0");
  expect(fs::exists(work / "ds/dataset.csv"), "build-dataset writes dataset.csv");

  expect(run(base + "select-features --log " + w + "/explore/transactions.jsonl --out " + w + "/sel") == 0,
         "select-features exits 0");
  expect(fs::exists(work / "sel/feature_manifest.txt"), "select-features writes a manifest");
  {
    // every surviving feature's recorded VIF must respect the threshold
    std::ifstream manifest(work / "sel/feature_manifest.txt");
    std::string line;
    std::size_t features = 0;
    bool all_below = true;
    while (std::getline(manifest, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string name;
      double vif = 0.0;
      ls >> name >> vif;
      if (ls.fail()) continue;
      ++features;
      all_below = all_below && vif <= 5.0 + 1e-6;
    }
    expect(features > 0, "manifest lists surviving features");
    expect(all_below, "all manifest VIF values are at or below 5");
  }

  expect(run(base + "train --log " + w + "/explore/transactions.jsonl --scenario " + scenario +
             " --out " + w + "/models") == 0,
         "train exits 0");
  expect(fs::exists(work / "models/forest.model"), "train writes forest.model");
  expect(fs::exists(work / "models/downtime.model"), "train writes downtime.model");
  std::string metrics = slurp(work / "models/metrics.txt");
  expect(metrics.find("forest precision@0.5=") != std::string::npos, "metrics report precision");
  expect(metrics.find("roc_auc=") != std::string::npos, "metrics report roc_auc");

  expect(run(base + "simulate --scenario " + eval_scenario + " --models " + w +
             "/models --out " + w + "/sim --payments 4000") == 0,
         "simulate exits 0");
  expect(fs::exists(work / "sim/report.txt"), "simulate writes a report");

  expect(run(base + "ab-test --scenario " + eval_scenario + " --models " + w + "/models --out " +
             w + "/ab1 --payments 8000 --seed 7") == 0,
         "ab-test run 1 exits 0");
  expect(run(base + "ab-test --scenario " + eval_scenario + " --models " + w + "/models --out " +
             w + "/ab2 --payments 8000 --seed 7") == 0,
         "ab-test run 2 exits 0");
  expect(slurp(work / "ab1/ab_report.txt") == slurp(work / "ab2/ab_report.txt"),
         "ab reports are byte-identical for the same seed");
  expect(slurp(work / "ab1/ab_timeline.csv") == slurp(work / "ab2/ab_timeline.csv"),
         "ab timelines are byte-identical for the same seed");
  expect(!slurp(work / "ab1/ab_report.txt").empty(), "ab report is non-empty");

  expect(run(base + "replay --log " + w + "/explore/transactions.jsonl --snapshot " + w +
             "/replayed.snapshot --scenario " + scenario) == 0,
         "replay exits 0");
  expect(fs::exists(work / "replayed.snapshot"), "replay writes a snapshot");

  // serve over stdio: route one payment, feed back, snapshot
  {
    std::ofstream in(work / "serve_in.jsonl");
    in << R"({"v":1,"type":"route","request":{"payment_id":"cli1","ts":1700000100,"merchant_id":"acme","method":"card","issuer_bank":"bankA","network":"visa","amount":500}})"
       << "\n";
    in << R"({"v":1,"type":"feedback","payment_id":"cli1","terminal_id":"k1","status":"success","ts":1700000100})"
       << "\n";
    in << "garbage line\n";
    in << R"({"v":1,"type":"snapshot","path":")" << w << R"(/served.snapshot"})" << "\n";
  }
  expect(run(base + "serve --models " + w + "/models --scenario " + eval_scenario +
             " --listen stdio < " + w + "/serve_in.jsonl > " + w + "/serve_out.jsonl") == 0,
         "serve exits 0 at end of input");
  {
    std::ifstream out(work / "serve_out.jsonl");
    std::string l1, l2, l3, l4;
    expect(static_cast<bool>(std::getline(out, l1)), "serve answered line 1");
    expect(static_cast<bool>(std::getline(out, l2)), "serve answered line 2");
    expect(static_cast<bool>(std::getline(out, l3)), "serve answered line 3");
    expect(static_cast<bool>(std::getline(out, l4)), "serve answered line 4");
    expect(l1.find("route_result") != std::string::npos, "route answered with route_result");
    expect(l2.find("ack") != std::string::npos, "feedback answered with ack");
    expect(l3.find("error") != std::string::npos, "garbage answered with error");
    expect(l4.find("snapshot_result") != std::string::npos, "snapshot answered with its path");
  }
  expect(fs::exists(work / "served.snapshot"), "serve wrote the requested snapshot");

#ifdef __unix__
  // TCP serving: same protocol over a socket
  {
    const int port = 7942;
    std::string spawn = base + "serve --models " + w + "/models --scenario " + eval_scenario +
                        " --listen 127.0.0.1:" + std::to_string(port) + " > /dev/null 2>&1 & echo $! > " +
                        w + "/server.pid";
    expect(run(spawn) == 0, "tcp server spawns");
    std::vector<std::string> responses = tcp_roundtrip(
        port,
        {R"({"v":1,"type":"route","request":{"payment_id":"tcp1","ts":1700000200,"merchant_id":"acme","method":"card","issuer_bank":"bankA","network":"visa","amount":500}})",
         R"({"v":1,"type":"feedback","payment_id":"tcp1","terminal_id":"k1","status":"success","ts":1700000200})",
         R"(broken)"});
    expect(responses.size() == 3, "tcp client got three responses");
    if (responses.size() == 3) {
      expect(responses[0].find("route_result") != std::string::npos, "tcp route answered");
      expect(responses[1].find("ack") != std::string::npos, "tcp feedback acknowledged");
      expect(responses[2].find("error") != std::string::npos, "tcp malformed line errored");
    }
    run("kill $(cat " + w + "/server.pid) 2>/dev/null");
  }
#endif

  // a rules file wired through the app config shapes routing decisions
  {
    const std::string rules_cfg = std::string(SMARTROUTE_CONFIG_DIR) + "/app-with-rules.json";
    std::ofstream in(work / "rules_in.jsonl");
    in << R"({"v":1,"type":"route","request":{"payment_id":"r1","ts":1700000300,"merchant_id":"acme","method":"card","issuer_bank":"bankA","network":"visa","amount":500}})"
       << "\n";
    in.close();
    expect(run(cli + " --config " + rules_cfg + " serve --models " + w + "/models --scenario " +
               eval_scenario + " --listen stdio < " + w + "/rules_in.jsonl > " + w +
               "/rules_out.jsonl") == 0,
           "serve with rules exits 0");
    std::string out = slurp(work / "rules_out.jsonl");
    expect(out.find("route_result") != std::string::npos, "rules route answered");
    expect(out.find("k4") == std::string::npos, "denied terminal k4 is absent from the decision");
    expect(out.find("k1") != std::string::npos, "allowed terminals remain");
  }

  // usage errors exit nonzero
  expect(run(cli + " definitely-not-a-command 2>/dev/null") != 0, "unknown command exits nonzero");

  std::cout << (failures == 0 ? "PASS" : "FAIL") << ": cli pipeline (" << checks << " checks, "
            << failures << " failures)\n";
  return failures == 0 ? 0 : 1;
}
