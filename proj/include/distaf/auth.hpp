#pragma once

#include "distaf/assessment.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace distaf {

enum class Role { Admin, Assessor, External };

inline constexpr Role kRoles[] = {Role::Admin, Role::Assessor, Role::External};

inline std::string_view to_string(Role r) {
    switch (r) {
    case Role::Admin: return "admin";
    case Role::Assessor: return "assessor";
    case Role::External: return "external";
    }
    return "external";
}

inline Role parse_role(std::string_view s) {
    if (s == "admin") return Role::Admin;
    if (s == "assessor") return Role::Assessor;
    if (s == "external") return Role::External;
    throw Error(ErrorCode::ParseError, "unknown role '" + std::string(s) + "'");
}

enum class Action { ManageUsers, CreateAssessment, EditAssessment, ReadAssessment, Compare, Export };

inline constexpr Action kActions[] = {Action::ManageUsers, Action::CreateAssessment, Action::EditAssessment,
                                      Action::ReadAssessment, Action::Compare, Action::Export};

inline std::string_view to_string(Action a) {
    switch (a) {
    case Action::ManageUsers: return "manage_users";
    case Action::CreateAssessment: return "create_assessment";
    case Action::EditAssessment: return "edit_assessment";
    case Action::ReadAssessment: return "read_assessment";
    case Action::Compare: return "compare";
    case Action::Export: return "export";
    }
    return "unknown";
}

struct AuthzDecision {
    bool allowed = false;
    std::string reason;
};

/// The role matrix. `status` is the status of the assessment acted on and is
/// ignored by actions that are not about one assessment.
inline AuthzDecision authz_check(Role role, Action action, Status status) {
    auto allow = [](std::string why) { return AuthzDecision{true, std::move(why)}; };
    auto deny = [](std::string why) { return AuthzDecision{false, std::move(why)}; };
    switch (role) {
    case Role::Admin:
        if (action == Action::ManageUsers) return allow("admins manage users");
        if (action == Action::ReadAssessment && status == Status::Public)
            return allow("public assessments are readable by every role");
        return deny("admins have no assessor powers");
    case Role::Assessor:
        if (action == Action::ManageUsers) return deny("only admins manage users");
        return allow("assessors lead assessments");
    case Role::External:
        if ((action == Action::ReadAssessment || action == Action::Export) && status == Status::Public)
            return allow("externals read public assessments");
        if (action == Action::ReadAssessment || action == Action::Export)
            return deny("externals only see public assessments");
        return deny("externals have read-only access");
    }
    return deny("unknown role");
}

namespace detail {

inline std::string to_hex(const unsigned char* data, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xF]);
    }
    return out;
}

inline std::vector<unsigned char> random_bytes(std::size_t n) {
    std::vector<unsigned char> buf(n);
    if (RAND_bytes(buf.data(), static_cast<int>(n)) != 1)
        throw Error(ErrorCode::IoError, "random generator failure");
    return buf;
}

inline std::string pbkdf2_hex(const std::string& password, const std::string& salt_hex, int iterations) {
    unsigned char out[32];
    if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                          reinterpret_cast<const unsigned char*>(salt_hex.data()), static_cast<int>(salt_hex.size()),
                          iterations, EVP_sha256(), sizeof out, out) != 1)
        throw Error(ErrorCode::IoError, "password hashing failure");
    return to_hex(out, sizeof out);
}

} // namespace detail

/// "pbkdf2-sha256$<iterations>$<salt>$<digest>"
inline std::string hash_password(const std::string& password, int iterations = 100000) {
    auto salt = detail::random_bytes(16);
    const auto salt_hex = detail::to_hex(salt.data(), salt.size());
    return "pbkdf2-sha256$" + std::to_string(iterations) + "$" + salt_hex + "$" +
           detail::pbkdf2_hex(password, salt_hex, iterations);
}

inline bool verify_password(const std::string& password, const std::string& credential) {
    const auto a = credential.find('$');
    const auto b = credential.find('$', a + 1);
    const auto c = credential.find('$', b + 1);
    if (a == std::string::npos || b == std::string::npos || c == std::string::npos) return false;
    if (credential.substr(0, a) != "pbkdf2-sha256") return false;
    int iterations = 0;
    try {
        iterations = std::stoi(credential.substr(a + 1, b - a - 1));
    } catch (...) {
        return false;
    }
    const auto salt_hex = credential.substr(b + 1, c - b - 1);
    const auto expected = credential.substr(c + 1);
    const auto actual = detail::pbkdf2_hex(password, salt_hex, iterations);
    return actual.size() == expected.size() && CRYPTO_memcmp(actual.data(), expected.data(), actual.size()) == 0;
}

/// 16 characters from an unambiguous alphabet.
inline std::string generate_temporary_password() {
    static const char alphabet[] = "ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz23456789";
    auto bytes = detail::random_bytes(16);
    std::string out;
    for (auto b : bytes) out.push_back(alphabet[b % (sizeof alphabet - 1)]);
    return out;
}

struct User {
    std::string username;
    Role role = Role::External;
    std::string credential;
    bool enabled = true;
    bool must_change_password = true;
};

inline json to_json(const User& u, bool with_credential = false) {
    json j = {{"username", u.username},
              {"role", to_string(u.role)},
              {"enabled", u.enabled},
              {"must_change_password", u.must_change_password}};
    if (with_credential) j["credential"] = u.credential;
    return j;
}

struct IssuedPassword {
    User user;
    std::string temporary_password;
};

enum class UserAction { Create, Disable, RegeneratePassword, SetRole };

/// User table. Writes are serialized by a single lock; with a data
/// directory the table lives in <dir>/users.json.
class UserDirectory {
public:
    explicit UserDirectory(std::optional<std::filesystem::path> data_dir = {}, int hash_iterations = 100000)
        : dir_(std::move(data_dir)), iterations_(hash_iterations) {
        if (!dir_) return;
        std::filesystem::create_directories(*dir_);
        const auto path = *dir_ / "users.json";
        if (!std::filesystem::exists(path)) return;
        auto doc = parse_json_text(read_file(path), path.string());
        for (const auto& uj : doc.at("users")) {
            User u;
            u.username = uj.at("username").get<std::string>();
            u.role = parse_role(uj.at("role").get<std::string>());
            u.credential = uj.at("credential").get<std::string>();
            u.enabled = uj.at("enabled").get<bool>();
            u.must_change_password = uj.at("must_change_password").get<bool>();
            users_[u.username] = u;
        }
    }

    /// Seeds the first admin account; refused once an enabled admin exists.
    IssuedPassword bootstrap_admin(const std::string& username) {
        std::unique_lock lock(mutex_);
        for (const auto& [name, u] : users_)
            if (u.role == Role::Admin && u.enabled)
                throw Error(ErrorCode::Forbidden, "an admin already exists (" + name + ")");
        return create_locked(username, Role::Admin);
    }

    /// Admin-only user management. `role` is used by Create and SetRole.
    IssuedPassword manage_user(const User& caller, UserAction action, const std::string& target,
                               std::optional<Role> role = std::nullopt) {
        std::unique_lock lock(mutex_);
        require_admin_locked(caller);
        switch (action) {
        case UserAction::Create:
            return create_locked(target, role.value_or(Role::External));
        case UserAction::Disable: {
            auto& u = find_locked(target);
            u.enabled = false;
            persist_locked();
            return {u, {}};
        }
        case UserAction::RegeneratePassword: {
            auto& u = find_locked(target);
            auto temp = generate_temporary_password();
            u.credential = hash_password(temp, iterations_);
            u.must_change_password = true;
            persist_locked();
            return {u, temp};
        }
        case UserAction::SetRole: {
            auto& u = find_locked(target);
            if (!role) throw Error(ErrorCode::ParseError, "set_role needs a role");
            u.role = *role;
            persist_locked();
            return {u, {}};
        }
        }
        throw Error(ErrorCode::ParseError, "unknown user action");
    }

    /// Disabled or unknown users and wrong passwords all fail the same way.
    User authenticate(const std::string& username, const std::string& password) const {
        std::shared_lock lock(mutex_);
        auto it = users_.find(username);
        if (it == users_.end() || !it->second.enabled || !verify_password(password, it->second.credential))
            throw Error(ErrorCode::AuthenticationFailed, "invalid credentials");
        return it->second;
    }

    User change_password(const std::string& username, const std::string& old_password,
                         const std::string& new_password) {
        std::unique_lock lock(mutex_);
        auto it = users_.find(username);
        if (it == users_.end() || !it->second.enabled || !verify_password(old_password, it->second.credential))
            throw Error(ErrorCode::AuthenticationFailed, "invalid credentials");
        if (new_password.size() < 8) throw Error(ErrorCode::OutOfRange, "new password must have at least 8 characters");
        if (new_password == old_password) throw Error(ErrorCode::OutOfRange, "new password must differ");
        it->second.credential = hash_password(new_password, iterations_);
        it->second.must_change_password = false;
        persist_locked();
        return it->second;
    }

    std::optional<User> find(const std::string& username) const {
        std::shared_lock lock(mutex_);
        auto it = users_.find(username);
        if (it == users_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<User> list(const User& caller) const {
        std::shared_lock lock(mutex_);
        require_admin_locked(caller);
        std::vector<User> out;
        for (const auto& [name, u] : users_) out.push_back(u);
        return out;
    }

private:
    static void require_admin_locked(const User& caller) {
        if (caller.role != Role::Admin || !caller.enabled)
            throw Error(ErrorCode::Forbidden, "user management requires the admin role");
    }

    User& find_locked(const std::string& username) {
        auto it = users_.find(username);
        if (it == users_.end()) throw Error(ErrorCode::UnknownUser, username);
        return it->second;
    }

    IssuedPassword create_locked(const std::string& username, Role role) {
        if (username.empty() || username.size() > 64) throw Error(ErrorCode::ParseError, "invalid username");
        if (users_.count(username)) throw Error(ErrorCode::DuplicateUsername, username);
        auto temp = generate_temporary_password();
        User u{username, role, hash_password(temp, iterations_), true, true};
        users_[username] = u;
        persist_locked();
        return {u, temp};
    }

    void persist_locked() const {
        if (!dir_) return;
        json users = json::array();
        for (const auto& [name, u] : users_) users.push_back(to_json(u, true));
        const auto path = *dir_ / "users.json";
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
            out << json{{"users", users}}.dump(2) << "\n";
        }
        std::filesystem::rename(tmp, path);
    }

    std::optional<std::filesystem::path> dir_;
    int iterations_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, User> users_;
};

/// Opaque bearer tokens mapped to usernames with an expiry.
class SessionManager {
public:
    explicit SessionManager(std::chrono::seconds lifetime = std::chrono::hours(8)) : lifetime_(lifetime) {}

    std::string issue(const std::string& username) {
        auto bytes = detail::random_bytes(24);
        auto token = detail::to_hex(bytes.data(), bytes.size());
        std::lock_guard lock(mutex_);
        sessions_[token] = {username, std::chrono::steady_clock::now() + lifetime_};
        return token;
    }

    std::optional<std::string> resolve(const std::string& token) {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(token);
        if (it == sessions_.end()) return std::nullopt;
        if (std::chrono::steady_clock::now() >= it->second.expires) {
            sessions_.erase(it);
            return std::nullopt;
        }
        return it->second.username;
    }

    void revoke_user(const std::string& username) {
        std::lock_guard lock(mutex_);
        for (auto it = sessions_.begin(); it != sessions_.end();)
            it = it->second.username == username ? sessions_.erase(it) : std::next(it);
    }

private:
    struct Session {
        std::string username;
        std::chrono::steady_clock::time_point expires;
    };
    std::chrono::seconds lifetime_;
    std::mutex mutex_;
    std::map<std::string, Session> sessions_;
};

} // namespace distaf
