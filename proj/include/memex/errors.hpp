#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace memex {

// Store errors
class InvalidIndexError : public std::runtime_error {
public:
    explicit InvalidIndexError(const std::string& what) : std::runtime_error(what) {}
};

class IndexNotFoundError : public std::runtime_error {
public:
    IndexNotFoundError(std::string index, std::vector<std::string> known, const std::string& what)
        : std::runtime_error(what), index_(std::move(index)), known_(std::move(known)) {}
    const std::string& index() const { return index_; }
    const std::vector<std::string>& known() const { return known_; }

private:
    std::string index_;
    std::vector<std::string> known_;
};

class StorageError : public std::runtime_error {
public:
    explicit StorageError(const std::string& what) : std::runtime_error(what) {}
};

// Anchor extraction errors
enum class Anchor { start, mid, end };

inline const char* anchor_name(Anchor a) {
    switch (a) {
        case Anchor::start: return "start";
        case Anchor::mid: return "mid";
        default: return "end";
    }
}

class AnchorNotFoundError : public std::runtime_error {
public:
    AnchorNotFoundError(Anchor which, const std::string& what)
        : std::runtime_error(what), which_(which) {}
    Anchor which() const { return which_; }

private:
    Anchor which_;
};

class MidAnchorVerificationError : public std::runtime_error {
public:
    explicit MidAnchorVerificationError(const std::string& what) : std::runtime_error(what) {}
};

// Trajectory post-processing
class SegmentationError : public std::runtime_error {
public:
    explicit SegmentationError(const std::string& what) : std::runtime_error(what) {}
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

// Remote policy endpoint
class GatewayTimeoutError : public std::runtime_error {
public:
    explicit GatewayTimeoutError(const std::string& what) : std::runtime_error(what) {}
};

class GatewayProtocolError : public std::runtime_error {
public:
    explicit GatewayProtocolError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace memex
