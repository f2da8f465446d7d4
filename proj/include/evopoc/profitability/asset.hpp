#pragma once

#include "evopoc/common/bigint.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace evopoc::profit {

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const { return "SimError"; }
};

#define EVOPOC_SIM_ERROR(Name)                                   \
    class Name : public SimError {                               \
    public:                                                      \
        using SimError::SimError;                                \
        const char* kind() const override { return #Name; }      \
    };
EVOPOC_SIM_ERROR(EmptyPool)
EVOPOC_SIM_ERROR(InsufficientBalance)
EVOPOC_SIM_ERROR(InsufficientReserve)
EVOPOC_SIM_ERROR(UnknownPool)
EVOPOC_SIM_ERROR(UnmatchedFlashLoan)
EVOPOC_SIM_ERROR(ScenarioFormat)
#undef EVOPOC_SIM_ERROR

constexpr std::uint32_t kPpm = 1000000;
constexpr std::uint32_t kDefaultGamma = 997000;
constexpr std::uint32_t kBps = 10000;

/// Constant-product output for `amount_in`, with the fee factor gamma in
/// parts per million: floor(g*x*R_out / (R_in*10^6 + g*x)).
/// Throws EmptyPool when either reserve is zero.
BigInt swap_out(const BigInt& amount_in, const BigInt& reserve_in, const BigInt& reserve_out,
                std::uint32_t gamma_ppm = kDefaultGamma);

struct Pool {
    std::string id;  // also the pool's account name
    std::string token0;
    std::string token1;
    BigInt reserve0 = 0;
    BigInt reserve1 = 0;
    std::uint32_t gamma_ppm = kDefaultGamma;

    bool has(const std::string& token) const { return token == token0 || token == token1; }
    const BigInt& reserve(const std::string& token) const { return token == token0 ? reserve0 : reserve1; }
    BigInt& reserve(const std::string& token) { return token == token0 ? reserve0 : reserve1; }
    const std::string& other(const std::string& token) const { return token == token0 ? token1 : token0; }
    bool operator==(const Pool&) const = default;
};

/// Fee-on-transfer split in basis points of the transferred amount. The
/// sender is debited the delivered and burned parts; the retained part stays
/// with the sender and is credited to the retention ledger of `ledger`.
struct FeeModel {
    std::uint32_t rate_bps = 0;
    std::uint32_t burn_bps = 0;
    std::uint32_t retained_bps = 0;
    std::string ledger;  // holder key; empty means the recipient

    bool active() const { return rate_bps != 0; }
    bool operator==(const FeeModel&) const = default;
};

struct AssetState {
    std::map<std::pair<std::string, std::string>, BigInt> balances;  // (account, token)
    std::map<std::string, BigInt> supply;
    std::map<std::string, Pool> pools;
    std::map<std::string, Rational> prices;  // token -> numeraire price
    std::map<std::tuple<std::string, std::string, std::string>, BigInt> allowances;  // (owner, spender, token)
    std::map<std::pair<std::string, std::string>, BigInt> retained;  // (token, holder)

    BigInt balance(const std::string& account, const std::string& token) const;
    const Pool& pool(const std::string& id) const;  // UnknownPool
    Pool& pool(const std::string& id);
    std::vector<std::string> tokens() const;
    bool operator==(const AssetState&) const = default;
};

namespace op {
struct Mint { std::string token, to; BigInt amount; bool operator==(const Mint&) const = default; };
struct Burn { std::string token, from; BigInt amount; bool operator==(const Burn&) const = default; };
struct Transfer {
    std::string token, from, to;
    BigInt amount;
    FeeModel fee;
    bool operator==(const Transfer&) const = default;
};
struct Approve { std::string owner, spender, token; BigInt amount; bool operator==(const Approve&) const = default; };
/// Paid by the recipient.
struct SwapExactIn {
    std::string pool, token_in;
    BigInt amount_in;
    std::string recipient;
    bool operator==(const SwapExactIn&) const = default;
};
struct FlashBorrow { std::string token; BigInt amount; std::string to; bool operator==(const FlashBorrow&) const = default; };
struct FlashRepay { std::string token; BigInt amount; std::string from; bool operator==(const FlashRepay&) const = default; };
struct Skim { std::string pool, to; bool operator==(const Skim&) const = default; };
struct Sync { std::string pool; bool operator==(const Sync&) const = default; };
struct ReleaseRetained {
    std::string token, holder;
    std::vector<std::pair<std::string, std::uint32_t>> recipients;  // account, share weight
    bool operator==(const ReleaseRetained&) const = default;
};
}  // namespace op

using AssetOp = std::variant<op::Mint, op::Burn, op::Transfer, op::Approve, op::SwapExactIn, op::FlashBorrow,
                             op::FlashRepay, op::Skim, op::Sync, op::ReleaseRetained>;

const char* op_name(const AssetOp& o);
/// Tokens and pools an op refers to.
std::vector<std::string> op_tokens(const AssetOp& o);
std::vector<std::string> op_pools(const AssetOp& o);

enum class Mode { Amm, Idealized };
const char* to_string(Mode m);
Mode parse_mode(const std::string& s);

/// Applies one op in place. Zero entries are dropped from every map so
/// equal states compare equal. On error the state is left unchanged.
void apply(AssetState& state, const AssetOp& o, Mode mode = Mode::Amm);

/// Numeraire value of the accounts' holdings: the numeraire is worth 1, a
/// token pooled against the numeraire is worth R_num/R_tok (first such pool
/// by id with non-zero reserves), else its oracle price, else 0.
Rational value(const AssetState& state, const std::string& numeraire, const std::vector<std::string>& accounts);
std::optional<Rational> unit_price(const AssetState& state, const std::string& token, const std::string& numeraire);

struct TraceEntry {
    std::string label;
    std::optional<AssetOp> op;  // absent on the initial entry
    AssetState state;
};
using SimTrace = std::vector<TraceEntry>;

struct SimOptions {
    Mode mode = Mode::Amm;
    std::uint32_t flash_fee_ppm = 0;
};

struct SimFailure {
    std::size_t step = 0;  // index into the script
    std::string kind;
    std::string message;
};

struct SimResult {
    AssetState final_state;
    SimTrace trace;
    Rational delta_w = 0;
    std::optional<SimFailure> failure;

    bool profitable() const { return !failure && delta_w > 0; }
};

struct LabeledOp {
    std::string label;
    AssetOp op;
};

/// Applies the script in order. Op errors and unmatched flash loans end the
/// run with a failure and the partial trace; delta_w is then computed on the
/// partial state but the result is never profitable.
SimResult simulate(const std::vector<LabeledOp>& script, const AssetState& initial, const std::string& numeraire,
                   const std::vector<std::string>& accounts, const SimOptions& options = {});

// ---- JSON ----

struct Scenario {
    std::string numeraire;
    std::vector<std::string> accounts;
    SimOptions options;
    AssetState initial;
    std::vector<LabeledOp> script;
};

std::string to_string(const Rational& r);
Rational parse_rational(const std::string& s);
BigInt amount_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AssetOp& o);
AssetOp op_from_json(const nlohmann::json& j);
/// Accepts a flat list of ops; `{"repeat": n, "ops": [...]}` entries expand
/// in place, each op labelled "<label or op name>#<round>".
std::vector<LabeledOp> script_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AssetState& s);
/// Pool accounts without listed balances get balances equal to their
/// reserves; tokens without a listed supply get the sum of balances.
AssetState state_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimTrace& t);
SimTrace trace_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimResult& r);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& p);

}  // namespace evopoc::profit
