// Records the drift transcript fixture against a loopback chat endpoint.
// Usage: make_drift_fixture <out.jsonl>

#include <iostream>

#include "drift_cases.hpp"

int main(int argc, char** argv) {
  using namespace tablenet;
  if (argc != 2) {
    std::cerr << "usage: make_drift_fixture <out.jsonl>\n";
    return 2;
  }
  drift::LocalEndpoint endpoint;
  auto live = std::make_shared<HttpTransport>(endpoint.url(), "", 10000, 1);
  auto log = std::make_shared<ProviderTranscript>(argv[1]);
  const drift::Tally t = drift::fill_all(std::make_shared<RecordingTransport>(live, log));
  std::cout << "recorded " << log->entries().size() << " exchanges: " << t.filled << " filled, " << t.drifted
            << " drifted, " << t.other_errors.size() << " other errors\n";
  return t.other_errors.empty() ? 0 : 1;
}
