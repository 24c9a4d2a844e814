#include <cstdlib>
#include <regex>

#include "httplib.h"
#include "json.hpp"
#include "tom/planner.hpp"

namespace tom {

BackendConfig BackendConfig::from_env() {
    BackendConfig cfg;
    if (const char* e = std::getenv("TOM_LLM_ENDPOINT")) cfg.endpoint = e;
    if (const char* k = std::getenv("TOM_LLM_KEY")) cfg.api_key = k;
    return cfg;
}

std::string build_prompt(const PlanningRequest& req) {
    std::string p;
    p += "You plan tool-use tasks for a two-arm robot on a table. Arms are 'left' and 'right'.\n";
    p += "Available motion functions:\n";
    p += "grasp(arm, tool): grasp a tool with the arm\n";
    p += "approach(arm, tool, m): bring the tool to the object m\n";
    p += "interact(arm, tool, m, goal): move m to goal ('target' or 'handover') with the tool\n";
    p += "stepping(arm, tool, m): drag m out of a walled area with pulsing motions\n";
    p += "pass(arm1, tool, m, arm2): hand m over to the other arm's workspace\n";
    p += "release(arm, tool): put the tool back at its home place\n";
    p += "Scene (meters, radians):\n";
    p += req.embedded_text();
    p += "Instruction: " + req.canonical_instruction + "\n";
    p += "Answer with one function call per line and nothing else.\n";
    return p;
}

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) {
        throw Error(ErrorCode::BackendUnavailable, "LLM endpoint '" + url + "' is not an http(s) URL");
    }
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string completion_text(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return body;
    for (const char* key : {"text", "completion", "content", "output", "response"}) {
        if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
    }
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
        if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string()) {
            return c["message"]["content"].get<std::string>();
        }
    }
    return body;
}

}  // namespace

LlmResult plan_llm(const PlanningRequest& req, const BackendConfig& backend) {
    if (backend.endpoint.empty()) {
        throw Error(ErrorCode::BackendUnavailable, "no LLM endpoint configured (set TOM_LLM_ENDPOINT)");
    }
    if (!(backend.timeout_s > 0.0)) throw Error(ErrorCode::InvalidParameter, "backend timeout must be positive");
    const Endpoint ep = split_endpoint(backend.endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (ep.origin.rfind("https://", 0) == 0) {
        throw Error(ErrorCode::BackendUnavailable, "https endpoints need a TLS-enabled build");
    }
#endif

    httplib::Client client(ep.origin);
    const auto secs = static_cast<time_t>(backend.timeout_s);
    const auto usecs = static_cast<time_t>((backend.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!backend.api_key.empty()) headers.emplace("Authorization", "Bearer " + backend.api_key);
    const nlohmann::json body = {{"model", backend.model}, {"prompt", build_prompt(req)}, {"temperature", 0}};

    const auto res = client.Post(ep.path, headers, body.dump(), "application/json");
    if (!res) {
        throw Error(ErrorCode::BackendUnavailable, "LLM request failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::BackendUnavailable, "LLM backend returned HTTP " + std::to_string(res->status));
    }

    LlmResult out;
    out.raw_text = completion_text(res->body);
    out.plan = parse_plan_text(out.raw_text);
    out.report = validate_plan(out.plan, req.observation);
    if (!out.report.ok()) {
        throw Error(ErrorCode::InvalidPlan, "backend plan failed validation:\n" + out.report.summary());
    }
    return out;
}

}  // namespace tom
