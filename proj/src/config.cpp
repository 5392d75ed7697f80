#include "herglotz/config.hpp"

#include <set>
#include <sstream>

#include "herglotz/io.hpp"

namespace herglotz::cli {

std::vector<double> GridSpec::values() const {
    std::vector<double> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    return out;
}

namespace {

const std::set<std::string> kTasks = {"minimize", "shoot", "table", "invariants", "compare"};

Vector parse_vector(const std::string& value, int line) {
    auto parts = io::split(value, ',');
    Vector v(static_cast<long>(parts.size()));
    for (size_t i = 0; i < parts.size(); ++i) {
        try {
            v[i] = io::parse_double(io::trim(parts[i]));
        } catch (const Error&) {
            throw ConfigError("expected a number list, got '" + value + "'", line);
        }
    }
    return v;
}

GridSpec parse_grid(const std::string& value, int line, const std::string& key) {
    auto parts = io::split(value, ':');
    if (parts.size() != 3)
        throw ConfigError("key '" + key + "' expects lo:hi:count, got '" + value + "'", line,
                          key);
    GridSpec g;
    try {
        g.lo = io::parse_double(io::trim(parts[0]));
        g.hi = io::parse_double(io::trim(parts[1]));
        g.count = static_cast<int>(io::parse_double(io::trim(parts[2])));
    } catch (const Error&) {
        throw ConfigError("key '" + key + "' expects numeric lo:hi:count", line, key);
    }
    if (g.count < 1) throw ConfigError("key '" + key + "' needs count >= 1", line, key);
    return g;
}

double parse_num(const std::string& value, int line, const std::string& key) {
    try {
        return io::parse_double(value);
    } catch (const Error&) {
        throw ConfigError("key '" + key + "' expects a number, got '" + value + "'", line, key);
    }
}

bool parse_bool(const std::string& value, int line, const std::string& key) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("key '" + key + "' expects true/false", line, key);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    bool saw_x0 = false, saw_x1 = false, saw_t = false;

    auto lines = io::split(text, '\n');
    std::ostringstream echo;
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        int line_no = static_cast<int>(ln) + 1;
        std::string line = lines[ln];
        if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        line = io::trim(line);
        if (line.empty()) continue;

        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", line_no);
        std::string key = io::trim(line.substr(0, eq));
        std::string value = io::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("empty key or value", line_no, key);
        echo << key << " = " << value << '\n';

        if (key == "task") {
            if (!kTasks.count(value))
                throw ConfigError("unknown task '" + value + "'", line_no, key);
            cfg.task = value;
        } else if (key == "model.name") {
            cfg.model_name = value;
        } else if (key.rfind("model.", 0) == 0) {
            cfg.model_params[key.substr(6)] = parse_num(value, line_no, key);
        } else if (key == "geometry.x0") {
            cfg.x0 = parse_vector(value, line_no);
            saw_x0 = true;
        } else if (key == "geometry.x1") {
            cfg.x1 = parse_vector(value, line_no);
            saw_x1 = true;
        } else if (key == "geometry.t") {
            cfg.t = parse_num(value, line_no, key);
            saw_t = true;
        } else if (key == "geometry.u0") {
            cfg.u0 = parse_num(value, line_no, key);
        } else if (key == "geometry.t_grid") {
            cfg.t_grid = parse_grid(value, line_no, key);
        } else if (key == "geometry.x_grid") {
            cfg.x_grid = parse_grid(value, line_no, key);
        } else if (key == "numerics.N") {
            cfg.N = static_cast<int>(parse_num(value, line_no, key));
        } else if (key == "numerics.gtol") {
            cfg.gtol = parse_num(value, line_no, key);
        } else if (key == "numerics.steps") {
            cfg.steps = static_cast<int>(parse_num(value, line_no, key));
        } else if (key == "numerics.multistart") {
            cfg.multistart = parse_bool(value, line_no, key);
        } else if (key == "numerics.seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_num(value, line_no, key));
        } else if (key == "output.dir") {
            cfg.out_dir = value;
        } else if (key == "output.formats") {
            cfg.formats.clear();
            for (const auto& f : io::split(value, ',')) {
                std::string fmt = io::trim(f);
                if (fmt != "csv" && fmt != "json" && fmt != "plotdata")
                    throw ConfigError("unknown format '" + fmt + "'", line_no, key);
                cfg.formats.push_back(fmt);
            }
        } else if (key == "output.jobs") {
            cfg.jobs = static_cast<int>(parse_num(value, line_no, key));
        } else {
            throw ConfigError("unknown key '" + key + "'", line_no, key);
        }
    }
    cfg.echo = echo.str();

    if (cfg.task.empty()) throw ConfigError("missing required key 'task'", 0, "task");
    if (cfg.model_name.empty())
        throw ConfigError("missing required key 'model.name'", 0, "model.name");

    const bool needs_endpoints =
        cfg.task == "minimize" || cfg.task == "shoot" || cfg.task == "compare";
    if (needs_endpoints) {
        if (!saw_x0) throw ConfigError("missing required key 'geometry.x0'", 0, "geometry.x0");
        if (!saw_x1) throw ConfigError("missing required key 'geometry.x1'", 0, "geometry.x1");
        if (!saw_t) throw ConfigError("missing required key 'geometry.t'", 0, "geometry.t");
        if (cfg.x0.size() != cfg.x1.size())
            throw ConfigError("geometry.x0 and geometry.x1 dimensions differ", 0, "geometry.x1");
    }
    if (cfg.task == "table") {
        if (!saw_x0) throw ConfigError("missing required key 'geometry.x0'", 0, "geometry.x0");
        if (!cfg.t_grid)
            throw ConfigError("missing required key 'geometry.t_grid'", 0, "geometry.t_grid");
        if (!cfg.x_grid)
            throw ConfigError("missing required key 'geometry.x_grid'", 0, "geometry.x_grid");
    }
    if (cfg.task == "invariants" && !saw_x0) cfg.x0 = Vector::Zero(1);
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    return parse_config_text(io::read_text_file(path));
}

}  // namespace herglotz::cli
