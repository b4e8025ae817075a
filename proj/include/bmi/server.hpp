#pragma once

#include <memory>

#include "bmi/config.hpp"

namespace bmi {

// HTTP/1.1 endpoint over the persisted pipeline state.
//
// Routes:
//   GET  /v1/households                       ids with their latest status
//   GET  /v1/households/{pid}/status          latest traffic-light record
//   GET  /v1/households/{pid}/anomalies       outlier scores, ?from=&to= bound
//                                             the day range (index or ISO date)
//   GET  /v1/regions/{id}/summary             histogram plus drifted rules
//   POST /v1/ingest                           readings CSV batch, appended for
//                                             the next prediction cycle
//
// Malformed queries or bodies get 400, unknown resources 404. Handlers read
// whole-file snapshots, so a concurrent pipeline rewrite (which publishes via
// rename) never yields a torn response.
class AlertService {
public:
    explicit AlertService(RunConfig cfg);
    ~AlertService();
    AlertService(const AlertService&) = delete;
    AlertService& operator=(const AlertService&) = delete;

    // Binds the configured host and port (port 0 picks a free one) and
    // serves from a background thread. Returns the bound port.
    int start();

    // Serves on the calling thread until stop() arrives from elsewhere.
    // Returns false if the socket could not be bound.
    bool run();

    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace bmi
