#include "slicesim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace slicesim {

using nlohmann::json;

void RewardParams::validate() const {
    if (!(accept_gs > 0.0)) throw ConfigError("rewards.accept_gs must be > 0");
    if (!(accept_be > 0.0)) throw ConfigError("rewards.accept_be must be > 0");
    if (!(accept_gs > accept_be)) throw ConfigError("rewards.accept_gs must exceed accept_be");
    if (!(drop_gs < 0.0)) throw ConfigError("rewards.drop_gs must be < 0");
    if (!(drop_be <= 0.0)) throw ConfigError("rewards.drop_be must be <= 0");
    if (!(scaledown_penalty <= 0.0)) throw ConfigError("rewards.scaledown_penalty must be <= 0");
}

void QlHyperparams::validate() const {
    if (levels < 1) throw ConfigError("qlearning.levels must be >= 1");
    if (queue_clamp < 0) throw ConfigError("qlearning.queue_clamp must be >= 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("qlearning.gamma must be in [0,1)");
    if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw ConfigError("qlearning.alpha0 must be in (0,1]");
    if (!(alpha_decay_visits > 0.0)) throw ConfigError("qlearning.alpha_decay_visits must be > 0");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) {
        throw ConfigError("qlearning.epsilon_start must be in [0,1]");
    }
    if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
        throw ConfigError("qlearning.epsilon_end must be in [0,1]");
    }
    if (episodes < 0) throw ConfigError("qlearning.episodes must be >= 0");
}

void GaParams::validate() const {
    if (population_size < 2 || population_size % 2 != 0) {
        throw ConfigError("genetic.population_size must be an even integer >= 2");
    }
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
        throw ConfigError("genetic.crossover_prob must be in [0,1]");
    }
    if (mutation_prob_per_bit != -1.0 &&
        !(mutation_prob_per_bit >= 0.0 && mutation_prob_per_bit <= 1.0)) {
        throw ConfigError("genetic.mutation_prob_per_bit must be in [0,1]");
    }
    if (elite_count < 1) throw ConfigError("genetic.elite_count must be >= 1");
    if (elite_count >= population_size) {
        throw ConfigError("genetic.elite_count must be < population_size");
    }
    if (generations < 0) throw ConfigError("genetic.generations must be >= 0");
    if (fitness_seeds < 1) throw ConfigError("genetic.fitness_seeds must be >= 1");
    if (fitness_horizon < 0) throw ConfigError("genetic.fitness_horizon must be >= 0");
}

void EvaluationParams::validate() const {
    if (episodes < 1) throw ConfigError("evaluation.episodes must be >= 1");
}

const SliceTypeSpec& Scenario::type(int type_id) const {
    return types[type_index(type_id)];
}

std::size_t Scenario::type_index(int type_id) const {
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (types[i].type_id == type_id) return i;
    }
    throw NotFoundError("unknown slice type " + std::to_string(type_id));
}

double Scenario::u_max() const {
    double best = 0.0;
    for (const SliceTypeSpec& t : types) {
        best = std::max(best, t.physical_cap(capacity) * t.utility_rate);
    }
    return best;
}

void Scenario::validate() const {
    if (dimension_names.empty()) throw ConfigError("resources.dimensions must be non-empty");
    if (dimension_names.size() != capacity.dims()) {
        throw ConfigError("resources.capacity must have one entry per dimension");
    }
    for (std::size_t d = 0; d < capacity.dims(); ++d) {
        if (!(capacity[d] > 0.0)) {
            throw ConfigError("resources.capacity[" + std::to_string(d) + "] must be > 0");
        }
    }
    if (types.empty()) throw ConfigError("scenario needs at least one slice type");
    std::set<int> ids;
    for (const SliceTypeSpec& t : types) {
        t.validate(capacity.dims());
        if (!ids.insert(t.type_id).second) {
            throw ConfigError("duplicate type_id " + std::to_string(t.type_id));
        }
    }
    if (!std::is_sorted(types.begin(), types.end(),
                        [](const SliceTypeSpec& a, const SliceTypeSpec& b) {
                            return a.type_id < b.type_id;
                        })) {
        throw ConfigError("types must be sorted by type_id");
    }
    rewards.validate();
    if (queue_capacity < 0) throw ConfigError("queue_capacity must be >= 0");
    if (horizon_slots < 1) throw ConfigError("horizon_slots must be >= 1");
    evaluation.validate();
    qlearning.validate();
    genetic.validate();
    if (!(u_max() > 0.0)) {
        throw ConfigError("scenario normalization bound U_max is 0; "
                          "at least one type needs positive utility and capacity");
    }
    inventory.check_invariants();
}

namespace {

// Rejects keys outside the declared schema so typos fail fast.
void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

double get_number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& where, const char* key, double def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return obj[key].get<double>();
}

std::int64_t get_int(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    if (!obj[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return obj[key].get<std::int64_t>();
}

std::int64_t get_int_or(const json& obj, const std::string& where, const char* key,
                        std::int64_t def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return obj[key].get<std::int64_t>();
}

bool get_bool_or(const json& obj, const std::string& where, const char* key, bool def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
    return obj[key].get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    if (!obj[key].is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return obj[key].get<std::string>();
}

ResourceVector get_vector(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    const json& arr = obj[key];
    if (!arr.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    std::vector<double> v;
    for (const json& e : arr) {
        if (!e.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
        v.push_back(e.get<double>());
    }
    try {
        return ResourceVector(std::move(v));
    } catch (const ConfigError& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

SliceTypeSpec parse_type(const json& obj, std::size_t index) {
    const std::string where = "types[" + std::to_string(index) + "]";
    check_keys(obj, where,
               {"type_id", "name", "class", "demand", "min_fraction", "utility_rate",
                "arrival_prob", "departure_prob", "patience_slots"});
    SliceTypeSpec t;
    t.type_id = static_cast<int>(get_int(obj, where, "type_id"));
    t.name = obj.contains("name") ? get_string(obj, where, "name")
                                  : "type" + std::to_string(t.type_id);
    const std::string cls = get_string(obj, where, "class");
    if (cls == "GS") {
        t.slice_class = SliceClass::GuaranteedService;
    } else if (cls == "BE") {
        t.slice_class = SliceClass::BestEffort;
    } else {
        throw ConfigError(where + ".class: expected \"GS\" or \"BE\", got \"" + cls + "\"");
    }
    t.demand = get_vector(obj, where, "demand");
    t.min_fraction = get_number_or(obj, where, "min_fraction", 1.0);
    t.utility_rate = get_number(obj, where, "utility_rate");
    t.arrival_prob = get_number(obj, where, "arrival_prob");
    t.departure_prob = get_number(obj, where, "departure_prob");
    t.patience_slots = static_cast<int>(get_int_or(obj, where, "patience_slots", 0));
    return t;
}

orch::RequiredKind parse_kind(const json& obj, const std::string& where) {
    check_keys(obj, where, {"segment", "kind"});
    orch::RequiredKind k;
    k.segment = segment_from_string(get_string(obj, where, "segment"));
    k.kind_tag = get_string(obj, where, "kind");
    return k;
}

orch::NetworkRequirements parse_requirements(const json& obj, const std::string& where,
                                             std::size_t dims) {
    check_keys(obj, where, {"demand", "kinds", "sharing_allowed", "performance_floor"});
    orch::NetworkRequirements req;
    req.demand = get_vector(obj, where, "demand");
    if (dims != 0 && req.demand.dims() != dims) {
        throw ConfigError(where + ".demand: expected " + std::to_string(dims) + " dimensions");
    }
    if (obj.contains("kinds")) {
        std::size_t i = 0;
        for (const json& e : obj["kinds"]) {
            req.required_nssi_kinds.push_back(
                parse_kind(e, where + ".kinds[" + std::to_string(i++) + "]"));
        }
    }
    req.sharing_allowed = get_bool_or(obj, where, "sharing_allowed", true);
    req.performance_floor = get_number_or(obj, where, "performance_floor", 0.0);
    return req;
}

orch::Inventory parse_inventory(const json& obj, const std::string& where) {
    check_keys(obj, where,
               {"pool_capacity", "known_kinds", "nssis", "nsis", "templates", "catalog"});
    orch::Inventory inv;
    inv.pool = ResourcePool(get_vector(obj, where, "pool_capacity"));
    const std::size_t dims = inv.pool.capacity().dims();

    if (obj.contains("known_kinds")) {
        std::size_t i = 0;
        for (const json& e : obj["known_kinds"]) {
            inv.known_kinds.push_back(parse_kind(e, where + ".known_kinds[" + std::to_string(i++) + "]"));
        }
    }
    if (obj.contains("nssis")) {
        std::size_t i = 0;
        for (const json& e : obj["nssis"]) {
            const std::string w = where + ".nssis[" + std::to_string(i++) + "]";
            check_keys(e, w, {"nssi_id", "segment", "kind", "capacity", "shareable"});
            orch::NssiRecord r;
            r.nssi.nssi_id = static_cast<std::uint64_t>(get_int(e, w, "nssi_id"));
            r.nssi.segment = segment_from_string(get_string(e, w, "segment"));
            r.nssi.kind_tag = get_string(e, w, "kind");
            r.nssi.capacity = get_vector(e, w, "capacity");
            if (r.nssi.capacity.dims() != dims) {
                throw ConfigError(w + ".capacity: expected " + std::to_string(dims) + " dimensions");
            }
            r.nssi.shareable = get_bool_or(e, w, "shareable", false);
            inv.nssis.push_back(std::move(r));
        }
    }
    if (obj.contains("nsis")) {
        std::size_t i = 0;
        for (const json& e : obj["nsis"]) {
            const std::string w = where + ".nsis[" + std::to_string(i++) + "]";
            check_keys(e, w, {"nsi_id", "constituent_nssis", "demand", "performance"});
            orch::NsiRecord n;
            n.nsi_id = static_cast<std::uint64_t>(get_int(e, w, "nsi_id"));
            if (!e.contains("constituent_nssis") || !e["constituent_nssis"].is_array()) {
                throw ConfigError(w + ": missing constituent_nssis array");
            }
            for (const json& c : e["constituent_nssis"]) {
                n.constituent_nssis.push_back(c.get<std::uint64_t>());
            }
            n.demand = get_vector(e, w, "demand");
            if (n.demand.dims() != dims) {
                throw ConfigError(w + ".demand: expected " + std::to_string(dims) + " dimensions");
            }
            n.performance = get_number_or(e, w, "performance", 0.0);
            inv.nsis.push_back(std::move(n));
        }
        // The loaded reservation model: every NSI reserves its demand on
        // each of its constituent NSSIs.
        for (orch::NsiRecord& n : inv.nsis) {
            for (std::uint64_t nssi_id : n.constituent_nssis) {
                orch::NssiRecord* r = inv.find_nssi(nssi_id);
                if (!r) {
                    throw ConfigError(where + ": NSI " + std::to_string(n.nsi_id) +
                                      " references unknown NSSI " + std::to_string(nssi_id));
                }
                r->shares[n.nsi_id] = n.demand;
                r->nssi.attached_nsis.push_back(n.nsi_id);
            }
        }
    }
    if (obj.contains("templates")) {
        std::size_t i = 0;
        for (const json& e : obj["templates"]) {
            const std::string w = where + ".templates[" + std::to_string(i++) + "]";
            check_keys(e, w, {"template_id", "kinds"});
            orch::SliceTemplate t;
            t.template_id = static_cast<int>(get_int(e, w, "template_id"));
            std::size_t j = 0;
            for (const json& k : e["kinds"]) {
                t.kinds.push_back(parse_kind(k, w + ".kinds[" + std::to_string(j++) + "]"));
            }
            inv.templates.push_back(std::move(t));
        }
    }
    if (obj.contains("catalog")) {
        if (!obj["catalog"].is_object()) throw ConfigError(where + ".catalog: expected an object");
        for (const auto& [profile, body] : obj["catalog"].items()) {
            inv.catalog.emplace(profile,
                                parse_requirements(body, where + ".catalog." + profile, dims));
        }
    }
    return inv;
}

Scenario parse_scenario(const json& root) {
    check_keys(root, "scenario",
               {"resources", "types", "rewards", "queue_capacity", "horizon_slots", "evaluation",
                "qlearning", "genetic", "orchestrator"});
    Scenario s;

    if (!root.contains("resources")) throw ConfigError("scenario: missing 'resources'");
    const json& res = root["resources"];
    check_keys(res, "resources", {"dimensions", "capacity"});
    if (!res.contains("dimensions") || !res["dimensions"].is_array()) {
        throw ConfigError("resources.dimensions: expected an array of strings");
    }
    for (const json& d : res["dimensions"]) {
        if (!d.is_string()) throw ConfigError("resources.dimensions: expected an array of strings");
        s.dimension_names.push_back(d.get<std::string>());
    }
    s.capacity = get_vector(res, "resources", "capacity");

    if (!root.contains("types") || !root["types"].is_array()) {
        throw ConfigError("scenario: missing 'types' array");
    }
    std::size_t i = 0;
    for (const json& t : root["types"]) s.types.push_back(parse_type(t, i++));
    std::sort(s.types.begin(), s.types.end(),
              [](const SliceTypeSpec& a, const SliceTypeSpec& b) { return a.type_id < b.type_id; });

    if (root.contains("rewards")) {
        const json& r = root["rewards"];
        check_keys(r, "rewards",
                   {"accept_gs", "accept_be", "drop_gs", "drop_be", "scaledown_penalty"});
        s.rewards.accept_gs = get_number_or(r, "rewards", "accept_gs", s.rewards.accept_gs);
        s.rewards.accept_be = get_number_or(r, "rewards", "accept_be", s.rewards.accept_be);
        s.rewards.drop_gs = get_number_or(r, "rewards", "drop_gs", s.rewards.drop_gs);
        s.rewards.drop_be = get_number_or(r, "rewards", "drop_be", s.rewards.drop_be);
        s.rewards.scaledown_penalty =
            get_number_or(r, "rewards", "scaledown_penalty", s.rewards.scaledown_penalty);
    }

    s.queue_capacity = static_cast<int>(get_int_or(root, "scenario", "queue_capacity", 8));
    s.horizon_slots = get_int_or(root, "scenario", "horizon_slots", 5000);

    if (root.contains("evaluation")) {
        const json& e = root["evaluation"];
        check_keys(e, "evaluation", {"episodes"});
        s.evaluation.episodes = static_cast<int>(get_int_or(e, "evaluation", "episodes", 5));
    }

    if (root.contains("qlearning")) {
        const json& q = root["qlearning"];
        check_keys(q, "qlearning",
                   {"levels", "queue_clamp", "gamma", "alpha0", "alpha_decay_visits",
                    "epsilon_start", "epsilon_end", "episodes", "init_value"});
        s.qlearning.levels = static_cast<int>(get_int_or(q, "qlearning", "levels", 4));
        s.qlearning.queue_clamp = static_cast<int>(get_int_or(q, "qlearning", "queue_clamp", 5));
        s.qlearning.gamma = get_number_or(q, "qlearning", "gamma", 0.95);
        s.qlearning.alpha0 = get_number_or(q, "qlearning", "alpha0", 0.5);
        s.qlearning.alpha_decay_visits =
            get_number_or(q, "qlearning", "alpha_decay_visits", 1000.0);
        s.qlearning.epsilon_start = get_number_or(q, "qlearning", "epsilon_start", 0.3);
        s.qlearning.epsilon_end = get_number_or(q, "qlearning", "epsilon_end", 0.01);
        s.qlearning.episodes = static_cast<int>(get_int_or(q, "qlearning", "episodes", 60));
        s.qlearning.init_value = get_number_or(q, "qlearning", "init_value", 0.0);
    }

    if (root.contains("genetic")) {
        const json& g = root["genetic"];
        check_keys(g, "genetic",
                   {"population_size", "crossover_prob", "mutation_prob_per_bit", "elite_count",
                    "generations", "fitness_seeds", "fitness_horizon"});
        s.genetic.population_size =
            static_cast<int>(get_int_or(g, "genetic", "population_size", 32));
        s.genetic.crossover_prob = get_number_or(g, "genetic", "crossover_prob", 0.9);
        s.genetic.mutation_prob_per_bit =
            get_number_or(g, "genetic", "mutation_prob_per_bit", -1.0);
        s.genetic.elite_count = static_cast<int>(get_int_or(g, "genetic", "elite_count", 2));
        s.genetic.generations = static_cast<int>(get_int_or(g, "genetic", "generations", 100));
        s.genetic.fitness_seeds = static_cast<int>(get_int_or(g, "genetic", "fitness_seeds", 3));
        s.genetic.fitness_horizon = get_int_or(g, "genetic", "fitness_horizon", 0);
    }

    if (root.contains("orchestrator")) {
        s.inventory = parse_inventory(root["orchestrator"], "orchestrator");
    } else {
        s.inventory.pool = ResourcePool(s.capacity);
    }

    s.validate();
    return s;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
    }
    return parse_scenario(root);
}

orch::Inventory inventory_from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("inventory JSON parse error: ") + e.what());
    }
    orch::Inventory inv = parse_inventory(root, "inventory");
    inv.check_invariants();
    return inv;
}

orch::NetworkRequirements requirements_from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("requirements JSON parse error: ") + e.what());
    }
    return parse_requirements(root, "requirements", 0);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return scenario_from_json_text(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace slicesim
