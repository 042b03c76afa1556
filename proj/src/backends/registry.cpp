#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "debate/backends.hpp"
#include "debate/errors.hpp"
#include "debate/http.hpp"
#include "debate/prompts.hpp"

namespace debate {

std::string_view to_string(CallPhase p) {
    switch (p) {
        case CallPhase::start: return "start";
        case CallPhase::debate: return "debate";
        case CallPhase::reflection: return "reflection";
        case CallPhase::summary: return "summary";
        case CallPhase::confidence: return "confidence";
        case CallPhase::judge: return "judge";
    }
    return "start";
}

RateLimiter::RateLimiter(int limit, Clock::duration interval, Clock& clock)
    : limit_(limit), interval_(interval), clock_(clock) {
    if (limit < 1) throw ConfigError("rate_limit.requests must be >= 1");
    if (interval <= Clock::duration::zero()) throw ConfigError("rate_limit.per_ms must be > 0");
}

void RateLimiter::acquire() {
    std::lock_guard lock(mu_);
    for (;;) {
        const auto now = clock_.now();
        while (!sent_.empty() && sent_.front() + interval_ <= now) sent_.pop_front();
        if (static_cast<int>(sent_.size()) < limit_) {
            sent_.push_back(now);
            return;
        }
        clock_.sleep_until(sent_.front() + interval_);
    }
}

BackendRegistry::BackendRegistry(Clock& clock) : clock_(clock) {}

void BackendRegistry::add(const std::string& id, std::shared_ptr<Backend> backend, RetryPolicy retry,
                          std::optional<std::pair<int, Clock::duration>> rate_limit) {
    if (id.empty()) throw ConfigError("backend id must not be empty");
    if (entries_.count(id)) throw ConfigError("duplicate backend id '" + id + "'");
    if (retry.max_retries < 0) throw ConfigError("backends." + id + ".retry.max_retries must be >= 0");
    Entry e{std::move(backend), retry, nullptr};
    if (rate_limit) e.limiter = std::make_unique<RateLimiter>(rate_limit->first, rate_limit->second, clock_);
    entries_.emplace(id, std::move(e));
}

bool BackendRegistry::contains(const std::string& id) const { return entries_.count(id) != 0; }

std::vector<std::string> BackendRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, e] : entries_) out.push_back(id);
    return out;
}

Backend& BackendRegistry::get(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw ConfigError("unknown backend id '" + id + "'");
    return *it->second.backend;
}

Completion BackendRegistry::complete(const std::string& id, const CallContext& ctx, const History& history,
                                     const SamplingParams& sampling) {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw ConfigError("unknown backend id '" + id + "'");
    if (history.empty() || history.back().role != Role::user) {
        throw BackendError("completion history must be non-empty and end with a user message");
    }
    Entry& e = it->second;
    for (int attempt = 1;; ++attempt) {
        if (e.limiter) e.limiter->acquire();
        try {
            Completion c = e.backend->complete(ctx, history, sampling);
            if (c.text.empty()) throw TransportError("backend '" + id + "' returned an empty response");
            c.attempts = attempt;
            return c;
        } catch (const BackendError& err) {
            if (!err.transient() || attempt > e.retry.max_retries) throw;
            const double factor = std::pow(e.retry.multiplier, attempt - 1);
            auto delay = std::chrono::milliseconds(
                static_cast<std::int64_t>(static_cast<double>(e.retry.base_delay.count()) * factor));
            delay = std::min(delay, e.retry.max_delay);
            spdlog::warn("backend {}: {} (attempt {}), retrying in {} ms", id, err.what(), attempt, delay.count());
            clock_.sleep_for(delay);
        }
    }
}

Completion BackendRegistry::probe_confidence(const std::string& id, const CallContext& ctx, const History& history,
                                             const std::string& answer, const SamplingParams& sampling) {
    History copy = history;
    copy.push_back(build_confidence_prompt(answer));
    CallContext probe = ctx;
    probe.phase = CallPhase::confidence;
    probe.context.clear();
    return complete(id, probe, copy, sampling);
}

namespace {

RetryPolicy parse_retry(const std::string& id, const json& spec) {
    RetryPolicy r;
    if (!spec.contains("retry")) return r;
    const auto& j = spec.at("retry");
    r.max_retries = j.value("max_retries", r.max_retries);
    r.base_delay = std::chrono::milliseconds(j.value("base_delay_ms", static_cast<std::int64_t>(r.base_delay.count())));
    r.multiplier = j.value("multiplier", r.multiplier);
    r.max_delay = std::chrono::milliseconds(j.value("max_delay_ms", static_cast<std::int64_t>(r.max_delay.count())));
    if (r.multiplier < 1.0) throw ConfigError("backends." + id + ".retry.multiplier must be >= 1");
    return r;
}

}  // namespace

std::unique_ptr<BackendRegistry> BackendRegistry::from_json(const json& specs, Clock& clock) {
    if (!specs.is_object() || specs.empty()) throw ConfigError("backends must be a non-empty object");
    auto reg = std::make_unique<BackendRegistry>(clock);
    for (const auto& [id, spec] : specs.items()) {
        const std::string where = "backends." + id;
        if (!spec.is_object() || !spec.contains("kind")) throw ConfigError(where + ".kind is required");
        const std::string kind = spec.at("kind").get<std::string>();
        std::shared_ptr<Backend> backend;
        try {
            if (kind == "chat_http") {
                ChatHttpSettings s;
                s.endpoint = spec.value("endpoint", std::string("https://api.openai.com/v1/chat/completions"));
                if (!spec.contains("model") || spec.at("model").get<std::string>().empty()) {
                    throw ConfigError(where + ".model is required for chat_http");
                }
                s.model = spec.at("model").get<std::string>();
                s.auth_env = spec.value("auth_env", std::string());
                if (spec.contains("headers")) s.headers = spec.at("headers").get<std::map<std::string, std::string>>();
                s.timeout = std::chrono::milliseconds(spec.value("timeout_ms", std::int64_t{120000}));
                backend = std::make_shared<ChatHttpBackend>(std::move(s));
            } else if (kind == "scripted") {
                backend = make_scripted_backend(spec);
            } else {
                throw ConfigError(where + ".kind must be chat_http or scripted, got '" + kind + "'");
            }
        } catch (const json::exception& e) {
            throw ConfigError(where + ": " + e.what());
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            if (msg.rfind(where, 0) == 0) throw;
            throw ConfigError(where + ": " + msg);
        }
        if (spec.contains("cache")) {
            const auto& c = spec.at("cache");
            if (c.is_string()) backend = std::make_shared<CachingBackend>(id, backend, c.get<std::string>());
            else if (c.is_boolean() && c.get<bool>()) backend = std::make_shared<CachingBackend>(id, backend);
        }
        std::optional<std::pair<int, Clock::duration>> limit;
        if (spec.contains("rate_limit")) {
            const auto& rl = spec.at("rate_limit");
            limit.emplace(rl.value("requests", 0),
                          std::chrono::milliseconds(rl.value("per_ms", std::int64_t{60000})));
            if (limit->first < 1) throw ConfigError(where + ".rate_limit.requests must be >= 1");
        }
        reg->add(id, std::move(backend), parse_retry(id, spec), limit);
    }
    return reg;
}

ChatHttpBackend::ChatHttpBackend(ChatHttpSettings settings) : settings_(std::move(settings)) {
    if (settings_.model.empty()) throw ConfigError("chat_http backend needs a model name");
    if (settings_.endpoint.empty()) throw ConfigError("chat_http backend needs an endpoint");
}

json ChatHttpBackend::request_body(const std::string& model, const History& history, const SamplingParams& sampling) {
    json messages = json::array();
    for (const auto& m : history) messages.push_back(m);
    return json{{"model", model},
                {"messages", messages},
                {"temperature", sampling.temperature},
                {"max_tokens", sampling.max_tokens}};
}

Completion ChatHttpBackend::complete(const CallContext&, const History& history, const SamplingParams& sampling) {
    std::map<std::string, std::string> headers = settings_.headers;
    if (!settings_.auth_env.empty()) {
        const char* token = std::getenv(settings_.auth_env.c_str());
        if (!token || !*token) throw AuthError("environment variable " + settings_.auth_env + " is not set");
        headers["Authorization"] = std::string("Bearer ") + token;
    }
    auto res = http::post_json(settings_.endpoint, request_body(settings_.model, history, sampling).dump(), headers,
                               settings_.timeout);
    const std::string snippet = res.body.substr(0, 300);
    if (res.status == 401 || res.status == 403) throw AuthError("HTTP " + std::to_string(res.status) + ": " + snippet);
    if (res.status == 429) throw RateLimited("HTTP 429: " + snippet);
    if (res.status >= 500) throw TransportError("HTTP " + std::to_string(res.status) + ": " + snippet);
    if (res.status == 400 || res.status == 413) {
        const auto lower = to_lower(res.body);
        if (lower.find("context") != std::string::npos || lower.find("too long") != std::string::npos ||
            res.status == 413) {
            throw ContextOverflow("HTTP " + std::to_string(res.status) + ": " + snippet);
        }
    }
    if (res.status != 200) throw BackendError("HTTP " + std::to_string(res.status) + ": " + snippet);
    json body;
    try {
        body = json::parse(res.body);
    } catch (const json::exception&) {
        throw TransportError("malformed JSON in chat completion response");
    }
    Completion c;
    try {
        const auto& msg = body.at("choices").at(0).at("message").at("content");
        c.text = msg.is_string() ? msg.get<std::string>() : std::string();
    } catch (const json::exception&) {
        throw TransportError("chat completion response has no choices[0].message.content");
    }
    if (body.contains("usage") && body["usage"].is_object()) {
        c.tokens.prompt = body["usage"].value("prompt_tokens", 0);
        c.tokens.completion = body["usage"].value("completion_tokens", 0);
    }
    return c;
}

CachingBackend::CachingBackend(std::string id, std::shared_ptr<Backend> inner, std::string cache_path)
    : id_(std::move(id)), inner_(std::move(inner)), path_(std::move(cache_path)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            cache_[j.at("key").get<std::string>()] =
                Completion{j.at("text").get<std::string>(), j.value("tokens", json::object()).get<TokenCounts>(), 1};
        } catch (const json::exception&) {
            spdlog::warn("cache {}: skipping malformed line", path_);
        }
    }
}

std::string CachingBackend::key(const History& history, const SamplingParams& sampling) const {
    json j{{"backend", id_}, {"model", inner_->model()}, {"history", history}, {"sampling", sampling}};
    return sha256_hex(j.dump());
}

Completion CachingBackend::complete(const CallContext& ctx, const History& history, const SamplingParams& sampling) {
    const auto k = key(history, sampling);
    {
        std::lock_guard lock(mu_);
        if (auto it = cache_.find(k); it != cache_.end()) {
            ++hits_;
            return it->second;
        }
    }
    Completion c = inner_->complete(ctx, history, sampling);
    std::lock_guard lock(mu_);
    if (cache_.emplace(k, c).second && !path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        out << json{{"key", k}, {"text", c.text}, {"tokens", c.tokens}}.dump() << "\n";
    }
    return c;
}

std::size_t CachingBackend::hits() const {
    std::lock_guard lock(mu_);
    return hits_;
}

}  // namespace debate
