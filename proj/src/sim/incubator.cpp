#include <cmath>
#include <json.hpp>
#include <numbers>
#include <set>

#include "dtinsight/sim.hpp"
#include "dtinsight/text.hpp"

namespace dtinsight::sim {

void SimParams::check() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    require(heatCapacity > 0, "C must be > 0");
    require(heaterPower >= 0, "P must be >= 0");
    require(lossConductance > 0, "G must be > 0");
    require(dt > 0, "dt must be > 0");
    require(halfBand >= 0, "h must be >= 0");
    require(noiseSigma >= 0, "sigma must be >= 0");
    require(emitEvery >= 1, "emitEvery must be >= 1");
    require(std::isfinite(ambient) && std::isfinite(setpoint) && std::isfinite(initialTemperature) &&
                std::isfinite(epoch),
            "temperatures and epoch must be finite");
}

SimParams params_from_json(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("parameter file: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("parameter file must hold a JSON object");

    static const std::set<std::string> known = {"C",  "P",  "G",          "Tamb",      "setpoint", "h",    "dt",
                                                "sigma", "seed", "T0",     "u0",        "closedLoop", "emitEvery",
                                                "epoch"};
    for (const auto& [k, v] : doc.items())
        if (!known.count(k)) throw std::invalid_argument("parameter file: unknown key '" + k + "'");

    SimParams p;
    auto number = [&](const char* key, double& out) {
        if (auto it = doc.find(key); it != doc.end()) {
            if (!it->is_number()) throw std::invalid_argument(std::string("parameter '") + key + "' must be a number");
            out = it->get<double>();
        }
    };
    number("C", p.heatCapacity);
    number("P", p.heaterPower);
    number("G", p.lossConductance);
    number("Tamb", p.ambient);
    number("setpoint", p.setpoint);
    number("h", p.halfBand);
    number("dt", p.dt);
    number("sigma", p.noiseSigma);
    number("T0", p.initialTemperature);
    number("epoch", p.epoch);
    if (!doc.contains("T0")) p.initialTemperature = p.ambient;
    if (auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_unsigned()) throw std::invalid_argument("parameter 'seed' must be a non-negative integer");
        p.seed = it->get<std::uint64_t>();
    }
    if (auto it = doc.find("emitEvery"); it != doc.end()) {
        if (!it->is_number_integer()) throw std::invalid_argument("parameter 'emitEvery' must be an integer");
        p.emitEvery = it->get<int>();
    }
    for (auto [key, target] : {std::pair{"u0", &p.initialHeater}, std::pair{"closedLoop", &p.closedLoop}}) {
        if (auto it = doc.find(key); it != doc.end()) {
            if (!it->is_boolean()) throw std::invalid_argument(std::string("parameter '") + key + "' must be a boolean");
            *target = it->get<bool>();
        }
    }
    p.check();
    return p;
}

SimState initial_state(const SimParams& p) { return {0, p.initialTemperature, p.initialHeater}; }

SimState step(const SimState& s, const SimParams& p) {
    const double u = s.heater ? 1.0 : 0.0;
    SimState next;
    next.temperature =
        s.temperature + p.dt * (p.heaterPower * u - p.lossConductance * (s.temperature - p.ambient)) / p.heatCapacity;
    next.heater = s.heater;
    if (p.closedLoop) {
        if (next.temperature < p.setpoint - p.halfBand)
            next.heater = true;
        else if (next.temperature > p.setpoint + p.halfBand)
            next.heater = false;
    }
    next.t = s.t + p.dt;
    return next;
}

double GaussianNoise::uniform() {
    // (0, 1]: never zero, so log() below is finite
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianNoise::next(double sigma) {
    if (sigma == 0) return 0;
    if (hasSpare_) {
        hasSpare_ = false;
        return sigma * spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    hasSpare_ = true;
    return sigma * r * std::cos(theta);
}

std::string sample_line(std::string_view topic, double ts, std::string_view field, double value) {
    std::string line = "{\"topic\":\"";
    line += topic;
    line += "\",\"ts\":";
    line += text::format_json_number(ts);
    line += ",\"fields\":{\"";
    line += field;
    line += "\":";
    line += text::format_json_number(value);
    line += "}}";
    return line;
}

std::size_t run(const SimParams& params, double durationS, const std::function<void(const std::string&)>& sink,
                const std::function<void()>& pace) {
    params.check();
    if (!(durationS >= 0)) throw std::invalid_argument("duration must be >= 0");
    GaussianNoise noise(params.seed);
    SimState s = initial_state(params);
    const auto steps = static_cast<long long>(std::floor(durationS / params.dt + 1e-9));
    std::size_t lines = 0;
    for (long long k = 1; k <= steps; ++k) {
        s = step(s, params);
        if (k % params.emitEvery != 0) continue;
        const double ts = params.epoch + s.t;
        sink(sample_line(kTemperatureTopic, ts, "temperature", s.temperature + noise.next(params.noiseSigma)));
        sink(sample_line(kHeaterTopic, ts, "on", s.heater ? 1 : 0));
        lines += 2;
        if (pace) pace();
    }
    return lines;
}

}  // namespace dtinsight::sim
