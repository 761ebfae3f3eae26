#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dtinsight::sim {

// Lumped thermal incubator with an on/off heater.
struct SimParams {
    double heatCapacity = 300;  // C, J/K
    double heaterPower = 20;    // P, W
    double lossConductance = 0.5;  // G, W/K
    double ambient = 21;        // Tamb, degC
    double setpoint = 35;       // degC
    double halfBand = 1;        // h, K
    double dt = 1;              // s
    double noiseSigma = 0.05;   // K
    std::uint64_t seed = 1;

    double initialTemperature = 21;
    bool initialHeater = false;
    bool closedLoop = true;  // false holds the heater at initialHeater
    int emitEvery = 1;
    double epoch = 1700000000;  // wall-clock seconds at sim time 0

    // Throws std::invalid_argument.
    void check() const;
};

// Reads the JSON parameter file format (keys: C, P, G, Tamb, setpoint, h, dt,
// sigma, seed, T0, u0, closedLoop, emitEvery, epoch; all optional).
SimParams params_from_json(std::string_view json_text);

struct SimState {
    double t = 0;
    double temperature = 21;
    bool heater = false;
};

SimState initial_state(const SimParams& p);

// Explicit Euler on C dT/dt = P u - G (T - Tamb), then the hysteresis rule.
SimState step(const SimState& s, const SimParams& p);

// Sensor noise: std::mt19937_64 seeded with the run seed, Box-Muller on two
// 53-bit uniforms. Both the engine and the transform are fully specified, so
// streams match across platforms and standard libraries.
class GaussianNoise {
public:
    explicit GaussianNoise(std::uint64_t seed) : engine_(seed) {}
    double next(double sigma);

private:
    double uniform();

    std::mt19937_64 engine_;
    bool hasSpare_ = false;
    double spare_ = 0;
};

// One telemetry line in the gateway wire format, without trailing newline.
std::string sample_line(std::string_view topic, double ts, std::string_view field, double value);

inline constexpr std::string_view kTemperatureTopic = "incubator.t1";
inline constexpr std::string_view kHeaterTopic = "incubator.heater";

// Steps for `durationS` seconds, emitting two lines (temperature, heater)
// every `emitEvery` steps through `sink`. Returns the number of lines.
// `pace` is called after each emission (for wall-clock rate limiting).
std::size_t run(const SimParams& params, double durationS, const std::function<void(const std::string&)>& sink,
                const std::function<void()>& pace = {});

}  // namespace dtinsight::sim
