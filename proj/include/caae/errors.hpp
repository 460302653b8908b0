#pragma once

#include <stdexcept>
#include <string>

namespace caae {

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedName : std::runtime_error {
    explicit MalformedName(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfRange : std::runtime_error {
    explicit OutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct BadChannels : std::runtime_error {
    explicit BadChannels(const std::string& what) : std::runtime_error(what) {}
};

struct EmptySource : std::runtime_error {
    explicit EmptySource(const std::string& what) : std::runtime_error(what) {}
};

struct BadConfig : std::runtime_error {
    explicit BadConfig(const std::string& what) : std::runtime_error(what) {}
};

struct CorruptCheckpoint : std::runtime_error {
    explicit CorruptCheckpoint(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteLoss : std::runtime_error {
    explicit NonFiniteLoss(const std::string& what) : std::runtime_error(what) {}
};

struct SingleClassDataset : std::runtime_error {
    explicit SingleClassDataset(const std::string& what) : std::runtime_error(what) {}
};

struct SingleIdentityDataset : std::runtime_error {
    explicit SingleIdentityDataset(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyInput : std::runtime_error {
    explicit EmptyInput(const std::string& what) : std::runtime_error(what) {}
};

struct TooFewValues : std::runtime_error {
    explicit TooFewValues(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace caae
