#include "evopoc/profitability/asset.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

namespace evopoc::profit {

using nlohmann::json;

BigInt swap_out(const BigInt& amount_in, const BigInt& reserve_in, const BigInt& reserve_out, std::uint32_t gamma_ppm) {
    if (reserve_in <= 0 || reserve_out <= 0) throw EmptyPool("swap against an empty pool");
    if (amount_in < 0) throw SimError("negative swap input");
    if (gamma_ppm == 0 || gamma_ppm > kPpm) throw SimError(fmt::format("fee factor {} out of range", gamma_ppm));
    BigInt gx = BigInt(gamma_ppm) * amount_in;
    return gx * reserve_out / (reserve_in * kPpm + gx);
}

BigInt AssetState::balance(const std::string& account, const std::string& token) const {
    auto it = balances.find({account, token});
    return it == balances.end() ? BigInt(0) : it->second;
}

const Pool& AssetState::pool(const std::string& id) const {
    auto it = pools.find(id);
    if (it == pools.end()) throw UnknownPool("unknown pool '" + id + "'");
    return it->second;
}

Pool& AssetState::pool(const std::string& id) {
    auto it = pools.find(id);
    if (it == pools.end()) throw UnknownPool("unknown pool '" + id + "'");
    return it->second;
}

std::vector<std::string> AssetState::tokens() const {
    std::set<std::string> out;
    for (const auto& [k, v] : balances) out.insert(k.second);
    for (const auto& [t, v] : supply) out.insert(t);
    for (const auto& [id, p] : pools) {
        out.insert(p.token0);
        out.insert(p.token1);
    }
    for (const auto& [t, v] : prices) out.insert(t);
    return {out.begin(), out.end()};
}

const char* op_name(const AssetOp& o) {
    static const char* names[] = {"Mint",        "Burn",       "Transfer", "Approve", "SwapExactIn",
                                  "FlashBorrow", "FlashRepay", "Skim",     "Sync",    "ReleaseRetained"};
    return names[o.index()];
}

std::vector<std::string> op_tokens(const AssetOp& o) {
    return std::visit(
        [](const auto& x) -> std::vector<std::string> {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, op::SwapExactIn>) return {x.token_in};
            else if constexpr (std::is_same_v<T, op::Skim> || std::is_same_v<T, op::Sync>) return {};
            else return {x.token};
        },
        o);
}

std::vector<std::string> op_pools(const AssetOp& o) {
    return std::visit(
        [](const auto& x) -> std::vector<std::string> {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, op::SwapExactIn> || std::is_same_v<T, op::Skim> ||
                          std::is_same_v<T, op::Sync>)
                return {x.pool};
            else return {};
        },
        o);
}

const char* to_string(Mode m) { return m == Mode::Amm ? "amm" : "idealized"; }

Mode parse_mode(const std::string& s) {
    if (s == "amm") return Mode::Amm;
    if (s == "idealized") return Mode::Idealized;
    throw ScenarioFormat("unknown mode '" + s + "'");
}

namespace {

void require_non_negative(const BigInt& amount, const char* what) {
    if (amount < 0) throw SimError(fmt::format("negative amount in {}", what));
}

void debit(AssetState& s, const std::string& account, const std::string& token, const BigInt& amount) {
    BigInt& b = s.balances[{account, token}];
    if (b < amount) {
        throw InsufficientBalance(fmt::format("{} holds {} {}, needs {}", account, b.str(), token, amount.str()));
    }
    b -= amount;
}

void credit(AssetState& s, const std::string& account, const std::string& token, const BigInt& amount) {
    s.balances[{account, token}] += amount;
}

void drop_zeros(AssetState& s) {
    auto zero = [](const auto& e) { return e.second == 0; };
    std::erase_if(s.balances, zero);
    std::erase_if(s.supply, zero);
    std::erase_if(s.allowances, zero);
    std::erase_if(s.retained, zero);
}

struct Applier {
    AssetState& s;
    Mode mode;

    void operator()(const op::Mint& o) {
        require_non_negative(o.amount, "Mint");
        credit(s, o.to, o.token, o.amount);
        s.supply[o.token] += o.amount;
    }
    void operator()(const op::Burn& o) {
        require_non_negative(o.amount, "Burn");
        debit(s, o.from, o.token, o.amount);
        s.supply[o.token] -= o.amount;
    }
    void operator()(const op::Transfer& o) {
        require_non_negative(o.amount, "Transfer");
        if (!o.fee.active()) {
            debit(s, o.from, o.token, o.amount);
            credit(s, o.to, o.token, o.amount);
            return;
        }
        if (o.fee.burn_bps + o.fee.retained_bps != o.fee.rate_bps || o.fee.rate_bps > kBps)
            throw SimError("fee shares do not add up to the fee rate");
        BigInt burn = o.amount * o.fee.burn_bps / kBps;
        BigInt kept = o.amount * o.fee.retained_bps / kBps;
        BigInt delivered = o.amount - burn - kept;
        debit(s, o.from, o.token, delivered + burn);
        credit(s, o.to, o.token, delivered);
        s.supply[o.token] -= burn;
        s.retained[{o.token, o.fee.ledger.empty() ? o.to : o.fee.ledger}] += kept;
    }
    void operator()(const op::Approve& o) {
        require_non_negative(o.amount, "Approve");
        s.allowances[{o.owner, o.spender, o.token}] = o.amount;
    }
    void operator()(const op::SwapExactIn& o) {
        require_non_negative(o.amount_in, "SwapExactIn");
        Pool& p = s.pool(o.pool);
        if (!p.has(o.token_in)) throw UnknownPool(fmt::format("pool '{}' does not trade {}", o.pool, o.token_in));
        const std::string out_token = p.other(o.token_in);
        BigInt& r_in = p.reserve(o.token_in);
        BigInt& r_out = p.reserve(out_token);
        BigInt out;
        if (mode == Mode::Amm) {
            out = swap_out(o.amount_in, r_in, r_out, p.gamma_ppm);
        } else {
            if (r_in <= 0 || r_out <= 0) throw EmptyPool("swap against an empty pool");
            out = o.amount_in * r_out / r_in;
            if (out >= r_out) throw InsufficientReserve(fmt::format("pool '{}' cannot pay {} {}", o.pool, out.str(), out_token));
        }
        if (s.balance(p.id, out_token) < out)
            throw InsufficientReserve(fmt::format("pool '{}' holds less than {} {}", o.pool, out.str(), out_token));
        debit(s, o.recipient, o.token_in, o.amount_in);
        credit(s, p.id, o.token_in, o.amount_in);
        debit(s, p.id, out_token, out);
        credit(s, o.recipient, out_token, out);
        r_in += o.amount_in;
        r_out -= out;
    }
    void operator()(const op::FlashBorrow& o) {
        require_non_negative(o.amount, "FlashBorrow");
        credit(s, o.to, o.token, o.amount);
    }
    void operator()(const op::FlashRepay& o) {
        require_non_negative(o.amount, "FlashRepay");
        debit(s, o.from, o.token, o.amount);
    }
    void operator()(const op::Skim& o) {
        Pool& p = s.pool(o.pool);
        for (const std::string& t : {p.token0, p.token1}) {
            BigInt surplus = s.balance(p.id, t) - p.reserve(t);
            if (surplus <= 0) continue;
            debit(s, p.id, t, surplus);
            credit(s, o.to, t, surplus);
        }
    }
    void operator()(const op::Sync& o) {
        Pool& p = s.pool(o.pool);
        p.reserve0 = s.balance(p.id, p.token0);
        p.reserve1 = s.balance(p.id, p.token1);
    }
    void operator()(const op::ReleaseRetained& o) {
        if (o.recipients.empty()) throw SimError("ReleaseRetained without recipients");
        std::uint64_t total = 0;
        for (const auto& [acct, w] : o.recipients) total += w;
        if (total == 0) throw SimError("ReleaseRetained shares sum to zero");
        auto key = std::make_pair(o.token, o.holder);
        BigInt amount = s.retained.count(key) ? s.retained[key] : BigInt(0);
        debit(s, o.holder, o.token, amount);
        BigInt paid = 0;
        for (std::size_t i = 0; i < o.recipients.size(); ++i) {
            BigInt part = i + 1 == o.recipients.size() ? BigInt(amount - paid) : BigInt(amount * o.recipients[i].second / total);
            credit(s, o.recipients[i].first, o.token, part);
            paid += part;
        }
        s.retained[key] = 0;
    }
};

}  // namespace

void apply(AssetState& state, const AssetOp& o, Mode mode) {
    AssetState next = state;
    std::visit(Applier{next, mode}, o);
    drop_zeros(next);
    state = std::move(next);
}

std::optional<Rational> unit_price(const AssetState& state, const std::string& token, const std::string& numeraire) {
    if (token == numeraire) return Rational(1);
    for (const auto& [id, p] : state.pools) {
        if (!p.has(token) || p.other(token) != numeraire || token == numeraire) continue;
        const BigInt& rt = p.reserve(token);
        const BigInt& rn = p.reserve(numeraire);
        if (rt > 0 && rn > 0) return Rational(rn, rt);
    }
    auto it = state.prices.find(token);
    if (it != state.prices.end()) return it->second;
    return std::nullopt;
}

Rational value(const AssetState& state, const std::string& numeraire, const std::vector<std::string>& accounts) {
    Rational total = 0;
    std::set<std::string> acct(accounts.begin(), accounts.end());
    for (const auto& [key, amount] : state.balances) {
        if (!acct.count(key.first) || amount == 0) continue;
        auto price = unit_price(state, key.second, numeraire);
        if (price) total += Rational(amount) * *price;
    }
    return total;
}

SimResult simulate(const std::vector<LabeledOp>& script, const AssetState& initial, const std::string& numeraire,
                   const std::vector<std::string>& accounts, const SimOptions& options) {
    SimResult r;
    r.final_state = initial;
    r.trace.push_back({"S0", std::nullopt, initial});
    std::map<std::string, BigInt> owed;  // token -> outstanding flash debt
    std::map<std::string, std::size_t> first_borrow;
    for (std::size_t i = 0; i < script.size(); ++i) {
        const AssetOp& o = script[i].op;
        try {
            apply(r.final_state, o, options.mode);
        } catch (const SimError& e) {
            r.failure = SimFailure{i, e.kind(), e.what()};
            break;
        }
        if (auto* b = std::get_if<op::FlashBorrow>(&o)) {
            BigInt fee = (b->amount * options.flash_fee_ppm + kPpm - 1) / kPpm;
            if (!owed.count(b->token) || owed[b->token] <= 0) first_borrow[b->token] = i;
            owed[b->token] += b->amount + fee;
        } else if (auto* p = std::get_if<op::FlashRepay>(&o)) {
            owed[p->token] -= p->amount;
        }
        r.trace.push_back({script[i].label.empty() ? fmt::format("S{}", i + 1) : script[i].label, o, r.final_state});
    }
    if (!r.failure) {
        for (const auto& [token, amount] : owed) {
            if (amount > 0) {
                r.failure = SimFailure{first_borrow[token], "UnmatchedFlashLoan",
                                       fmt::format("flash loan of {} short by {}", token, amount.str())};
                break;
            }
        }
    }
    r.delta_w = value(r.final_state, numeraire, accounts) - value(initial, numeraire, accounts);
    return r;
}

// ---- JSON ----

std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

Rational parse_rational(const std::string& s) {
    try {
        auto slash = s.find('/');
        if (slash != std::string::npos) return Rational(parse_bigint(s.substr(0, slash)), parse_bigint(s.substr(slash + 1)));
        auto dot = s.find('.');
        if (dot != std::string::npos && s.find_first_of("eE") == std::string::npos) {
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            return Rational(parse_bigint(digits), pow10(static_cast<unsigned>(s.size() - dot - 1)));
        }
        return Rational(parse_bigint(s));
    } catch (const std::exception&) {
        throw ScenarioFormat("not a number: '" + s + "'");
    }
}

BigInt amount_from_json(const json& j) {
    if (j.is_number_unsigned()) return BigInt(j.get<std::uint64_t>());
    if (j.is_number_integer()) {
        auto v = j.get<std::int64_t>();
        if (v < 0) throw ScenarioFormat("negative amount");
        return BigInt(v);
    }
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "max") return (BigInt(1) << 256) - 1;
        Rational r = parse_rational(s);
        if (denominator(r) != 1 || r < 0) throw ScenarioFormat("amount is not a non-negative integer: '" + s + "'");
        return numerator(r);
    }
    throw ScenarioFormat("amount must be an integer or a decimal string");
}

namespace {

std::string str_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw ScenarioFormat(fmt::format("missing string field '{}'", key));
    return j[key].get<std::string>();
}

BigInt amount_field(const json& j, const char* key) {
    if (!j.contains(key)) throw ScenarioFormat(fmt::format("missing amount field '{}'", key));
    return amount_from_json(j[key]);
}

std::uint32_t u32(const json& j, const char* key, std::uint32_t def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number_unsigned()) throw ScenarioFormat(fmt::format("'{}' must be a non-negative integer", key));
    return j[key].get<std::uint32_t>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ScenarioFormat("unknown field '" + k + "'");
    }
}

}  // namespace

json to_json(const AssetOp& o) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            json j;
            if constexpr (std::is_same_v<T, op::Mint>) {
                j = {{"op", "Mint"}, {"token", x.token}, {"to", x.to}, {"amount", x.amount.str()}};
            } else if constexpr (std::is_same_v<T, op::Burn>) {
                j = {{"op", "Burn"}, {"token", x.token}, {"from", x.from}, {"amount", x.amount.str()}};
            } else if constexpr (std::is_same_v<T, op::Transfer>) {
                j = {{"op", "Transfer"}, {"token", x.token}, {"from", x.from}, {"to", x.to}, {"amount", x.amount.str()}};
                if (x.fee.active())
                    j["fee"] = {{"rate_bps", x.fee.rate_bps},
                                {"burn_bps", x.fee.burn_bps},
                                {"retained_bps", x.fee.retained_bps},
                                {"ledger", x.fee.ledger}};
            } else if constexpr (std::is_same_v<T, op::Approve>) {
                j = {{"op", "Approve"}, {"owner", x.owner}, {"spender", x.spender}, {"token", x.token},
                     {"amount", x.amount.str()}};
            } else if constexpr (std::is_same_v<T, op::SwapExactIn>) {
                j = {{"op", "SwapExactIn"}, {"pool", x.pool}, {"token_in", x.token_in},
                     {"amount_in", x.amount_in.str()}, {"recipient", x.recipient}};
            } else if constexpr (std::is_same_v<T, op::FlashBorrow>) {
                j = {{"op", "FlashBorrow"}, {"token", x.token}, {"amount", x.amount.str()}, {"to", x.to}};
            } else if constexpr (std::is_same_v<T, op::FlashRepay>) {
                j = {{"op", "FlashRepay"}, {"token", x.token}, {"amount", x.amount.str()}, {"from", x.from}};
            } else if constexpr (std::is_same_v<T, op::Skim>) {
                j = {{"op", "Skim"}, {"pool", x.pool}, {"to", x.to}};
            } else if constexpr (std::is_same_v<T, op::Sync>) {
                j = {{"op", "Sync"}, {"pool", x.pool}};
            } else {
                json rs = json::array();
                for (const auto& [a, w] : x.recipients) rs.push_back({{"account", a}, {"share", w}});
                j = {{"op", "ReleaseRetained"}, {"token", x.token}, {"holder", x.holder}, {"recipients", rs}};
            }
            return j;
        },
        o);
}

AssetOp op_from_json(const json& j) {
    if (!j.is_object()) throw ScenarioFormat("op must be an object");
    const std::string kind = str_field(j, "op");
    if (kind == "Mint") {
        check_keys(j, {"op", "label", "token", "to", "amount"});
        return op::Mint{str_field(j, "token"), str_field(j, "to"), amount_field(j, "amount")};
    }
    if (kind == "Burn") {
        check_keys(j, {"op", "label", "token", "from", "amount"});
        return op::Burn{str_field(j, "token"), str_field(j, "from"), amount_field(j, "amount")};
    }
    if (kind == "Transfer") {
        check_keys(j, {"op", "label", "token", "from", "to", "amount", "fee"});
        op::Transfer t{str_field(j, "token"), str_field(j, "from"), str_field(j, "to"), amount_field(j, "amount"), {}};
        if (j.contains("fee")) {
            const json& f = j["fee"];
            check_keys(f, {"rate_bps", "burn_bps", "retained_bps", "ledger"});
            t.fee.rate_bps = u32(f, "rate_bps", 0);
            t.fee.burn_bps = u32(f, "burn_bps", 0);
            t.fee.retained_bps = u32(f, "retained_bps", 0);
            t.fee.ledger = f.value("ledger", "");
            if (t.fee.burn_bps + t.fee.retained_bps != t.fee.rate_bps || t.fee.rate_bps > kBps)
                throw ScenarioFormat("fee burn and retained shares must add up to the rate");
        }
        return t;
    }
    if (kind == "Approve") {
        check_keys(j, {"op", "label", "owner", "spender", "token", "amount"});
        return op::Approve{str_field(j, "owner"), str_field(j, "spender"), str_field(j, "token"),
                           amount_field(j, "amount")};
    }
    if (kind == "SwapExactIn") {
        check_keys(j, {"op", "label", "pool", "token_in", "amount_in", "recipient"});
        return op::SwapExactIn{str_field(j, "pool"), str_field(j, "token_in"), amount_field(j, "amount_in"),
                               str_field(j, "recipient")};
    }
    if (kind == "FlashBorrow") {
        check_keys(j, {"op", "label", "token", "amount", "to"});
        return op::FlashBorrow{str_field(j, "token"), amount_field(j, "amount"), str_field(j, "to")};
    }
    if (kind == "FlashRepay") {
        check_keys(j, {"op", "label", "token", "amount", "from"});
        return op::FlashRepay{str_field(j, "token"), amount_field(j, "amount"), str_field(j, "from")};
    }
    if (kind == "Skim") {
        check_keys(j, {"op", "label", "pool", "to"});
        return op::Skim{str_field(j, "pool"), str_field(j, "to")};
    }
    if (kind == "Sync") {
        check_keys(j, {"op", "label", "pool"});
        return op::Sync{str_field(j, "pool")};
    }
    if (kind == "ReleaseRetained") {
        check_keys(j, {"op", "label", "token", "holder", "recipients"});
        op::ReleaseRetained r{str_field(j, "token"), str_field(j, "holder"), {}};
        if (!j.contains("recipients") || !j["recipients"].is_array())
            throw ScenarioFormat("ReleaseRetained needs a recipients list");
        for (const auto& e : j["recipients"]) r.recipients.emplace_back(str_field(e, "account"), u32(e, "share", 1));
        return r;
    }
    throw ScenarioFormat("unknown op '" + kind + "'");
}

std::vector<LabeledOp> script_from_json(const json& j) {
    if (!j.is_array()) throw ScenarioFormat("script must be a list");
    std::vector<LabeledOp> out;
    for (const auto& e : j) {
        if (e.is_object() && e.contains("repeat")) {
            check_keys(e, {"repeat", "ops"});
            std::uint32_t n = u32(e, "repeat", 0);
            const json ops = e.value("ops", json::array());
            auto body = script_from_json(ops);
            for (std::uint32_t r = 1; r <= n; ++r)
                for (const auto& o : body)
                    out.push_back({fmt::format("{}#{}", o.label.empty() ? op_name(o.op) : o.label, r), o.op});
            continue;
        }
        out.push_back({e.is_object() ? e.value("label", "") : "", op_from_json(e)});
    }
    return out;
}

json to_json(const AssetState& s) {
    json balances = json::object();
    for (const auto& [k, v] : s.balances) balances[k.first][k.second] = v.str();
    json supply = json::object();
    for (const auto& [t, v] : s.supply) supply[t] = v.str();
    json pools = json::array();
    for (const auto& [id, p] : s.pools)
        pools.push_back({{"id", p.id}, {"token0", p.token0}, {"token1", p.token1}, {"reserve0", p.reserve0.str()},
                         {"reserve1", p.reserve1.str()}, {"gamma_ppm", p.gamma_ppm}});
    json prices = json::object();
    for (const auto& [t, v] : s.prices) prices[t] = to_string(v);
    json allowances = json::array();
    for (const auto& [k, v] : s.allowances)
        allowances.push_back({{"owner", std::get<0>(k)}, {"spender", std::get<1>(k)}, {"token", std::get<2>(k)},
                              {"amount", v.str()}});
    json retained = json::array();
    for (const auto& [k, v] : s.retained) retained.push_back({{"token", k.first}, {"holder", k.second}, {"amount", v.str()}});
    return {{"balances", balances}, {"supply", supply},         {"pools", pools},
            {"prices", prices},     {"allowances", allowances}, {"retained", retained}};
}

AssetState state_from_json(const json& j) {
    if (!j.is_object()) throw ScenarioFormat("state must be an object");
    check_keys(j, {"balances", "supply", "pools", "prices", "allowances", "retained"});
    AssetState s;
    const json balances = j.value("balances", json::object());
    const json pools = j.value("pools", json::array());
    const json prices = j.value("prices", json::object());
    const json allowances = j.value("allowances", json::array());
    const json retained = j.value("retained", json::array());
    for (const auto& [acct, toks] : balances.items())
        for (const auto& [tok, amt] : toks.items()) s.balances[{acct, tok}] = amount_from_json(amt);
    for (const auto& p : pools) {
        check_keys(p, {"id", "token0", "token1", "reserve0", "reserve1", "gamma_ppm"});
        Pool pool{str_field(p, "id"), str_field(p, "token0"), str_field(p, "token1"), amount_field(p, "reserve0"),
                  amount_field(p, "reserve1"), u32(p, "gamma_ppm", kDefaultGamma)};
        if (pool.token0 == pool.token1) throw ScenarioFormat("pool '" + pool.id + "' pairs a token with itself");
        if (pool.gamma_ppm == 0 || pool.gamma_ppm > kPpm) throw ScenarioFormat("gamma_ppm out of range");
        for (const std::string& t : {pool.token0, pool.token1})
            if (!s.balances.count({pool.id, t})) s.balances[{pool.id, t}] = pool.reserve(t);
        s.pools[pool.id] = pool;
    }
    for (const auto& [tok, v] : prices.items())
        s.prices[tok] = parse_rational(v.is_string() ? v.get<std::string>() : v.dump());
    for (const auto& a : allowances)
        s.allowances[{str_field(a, "owner"), str_field(a, "spender"), str_field(a, "token")}] = amount_field(a, "amount");
    for (const auto& r : retained)
        s.retained[{str_field(r, "token"), str_field(r, "holder")}] = amount_field(r, "amount");
    const json supply = j.value("supply", json::object());
    for (const auto& [tok, v] : supply.items()) s.supply[tok] = amount_from_json(v);
    for (const auto& [k, v] : s.balances)
        if (!supply.contains(k.second)) s.supply[k.second] += v;
    drop_zeros(s);
    return s;
}

json to_json(const SimTrace& t) {
    json out = json::array();
    for (const auto& e : t)
        out.push_back({{"label", e.label}, {"op", e.op ? to_json(*e.op) : json(nullptr)}, {"state", to_json(e.state)}});
    return out;
}

SimTrace trace_from_json(const json& j) {
    if (!j.is_array()) throw ScenarioFormat("trace must be a list");
    SimTrace t;
    for (const auto& e : j) {
        TraceEntry entry{str_field(e, "label"), std::nullopt, state_from_json(e.at("state"))};
        if (!e.at("op").is_null()) entry.op = op_from_json(e["op"]);
        t.push_back(std::move(entry));
    }
    return t;
}

json to_json(const SimResult& r) {
    json j = {{"delta_w", to_string(r.delta_w)}, {"profitable", r.profitable()}, {"trace", to_json(r.trace)}};
    if (r.failure)
        j["failure"] = {{"step", r.failure->step}, {"kind", r.failure->kind}, {"message", r.failure->message}};
    return j;
}

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ScenarioFormat("scenario must be an object");
    check_keys(j, {"numeraire", "accounts", "mode", "flash_fee_ppm", "initial", "script", "description"});
    Scenario s;
    s.numeraire = str_field(j, "numeraire");
    const json accounts = j.value("accounts", json::array());
    for (const auto& a : accounts) s.accounts.push_back(a.get<std::string>());
    if (s.accounts.empty()) throw ScenarioFormat("scenario names no attacker accounts");
    s.options.mode = parse_mode(j.value("mode", "amm"));
    s.options.flash_fee_ppm = u32(j, "flash_fee_ppm", 0);
    s.initial = state_from_json(j.value("initial", json::object()));
    s.script = script_from_json(j.value("script", json::array()));
    return s;
}

Scenario load_scenario(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ScenarioFormat("cannot read " + p.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioFormat(p.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

}  // namespace evopoc::profit
