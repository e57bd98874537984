#include "aqo.h"

#include <cstring>
#include <new>
#include <string>

#include "aqo/errors.hpp"
#include "aqo/pipelines.hpp"

struct aqo_config {
    aqo::RunConfig cfg;
};

struct aqo_result {
    std::string json;
    bool has_csv = false;
    std::string csv;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
aqo_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return AQO_OK;
    } catch (const aqo::InvalidArgument& e) {
        g_last_error = e.what();
        return AQO_ERR_CONFIG;
    } catch (const aqo::CapacityError& e) {
        g_last_error = e.what();
        return AQO_ERR_CONFIG;
    } catch (const aqo::StructuralError& e) {
        g_last_error = e.what();
        return AQO_ERR_STRUCTURAL;
    } catch (const aqo::NumericalError& e) {
        g_last_error = e.what();
        return AQO_ERR_NUMERICAL;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return AQO_ERR_NUMERICAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return AQO_ERR_NUMERICAL;
    } catch (...) {
        g_last_error = "unknown error";
        return AQO_ERR_NUMERICAL;
    }
}

aqo_status fail_config(const char* message) {
    g_last_error = message;
    return AQO_ERR_CONFIG;
}

}  // namespace

extern "C" {

const char* aqo_version(void) { return aqo::version(); }

const char* aqo_last_error(void) { return g_last_error.c_str(); }

aqo_config* aqo_config_create(void) { return new (std::nothrow) aqo_config{}; }

void aqo_config_destroy(aqo_config* cfg) { delete cfg; }

aqo_status aqo_config_set(aqo_config* cfg, const char* key, const char* value) {
    if (cfg == nullptr) return fail_config("aqo_config_set: cfg is NULL");
    if (key == nullptr) return fail_config("aqo_config_set: key is NULL");
    if (value == nullptr) return fail_config("aqo_config_set: value is NULL");
    return guarded([&] { cfg->cfg.set(key, value); });
}

aqo_status aqo_config_parse(aqo_config* cfg, const char* text) {
    if (cfg == nullptr) return fail_config("aqo_config_parse: cfg is NULL");
    if (text == nullptr) return fail_config("aqo_config_parse: text is NULL");
    return guarded([&] { cfg->cfg.parse(text); });
}

aqo_status aqo_config_canonical(const aqo_config* cfg, char** text) {
    if (cfg == nullptr) return fail_config("aqo_config_canonical: cfg is NULL");
    if (text == nullptr) return fail_config("aqo_config_canonical: text is NULL");
    return guarded([&] {
        const std::string s = cfg->cfg.canonical();
        char* buf = new char[s.size() + 1];
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *text = buf;
    });
}

aqo_status aqo_run(const aqo_config* cfg, const char* command,
                   aqo_result** result) {
    if (cfg == nullptr) return fail_config("aqo_run: cfg is NULL");
    if (command == nullptr) return fail_config("aqo_run: command is NULL");
    if (result == nullptr) return fail_config("aqo_run: result is NULL");
    *result = nullptr;
    return guarded([&] {
        const aqo::RunResult r = aqo::run_command(cfg->cfg, command);
        auto* out = new aqo_result{};
        out->json = r.bundle.dump(2);
        out->json.push_back('\n');
        if (r.csv.has_value()) {
            out->has_csv = true;
            out->csv = *r.csv;
        }
        *result = out;
    });
}

const char* aqo_result_json(const aqo_result* result) {
    return result != nullptr ? result->json.c_str() : nullptr;
}

const char* aqo_result_csv(const aqo_result* result) {
    return result != nullptr && result->has_csv ? result->csv.c_str() : nullptr;
}

void aqo_result_destroy(aqo_result* result) { delete result; }

void aqo_string_free(char* text) { delete[] text; }

}  // extern "C"
