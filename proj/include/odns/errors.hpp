// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <stdexcept>
#include <string>

namespace odns {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- wire codec ---
class OversizeName : public Error {
public:
  explicit OversizeName(const std::string& what) : Error("oversize name: " + what) {}
};

class MalformedMessage : public Error {
public:
  explicit MalformedMessage(const std::string& what) : Error("malformed message: " + what) {}
};

// --- crypto / query-name encoding ---
class RngFailure : public Error {
public:
  explicit RngFailure(const std::string& what) : Error("rng failure: " + what) {}
};

class AuthFailure : public Error {
public:
  explicit AuthFailure(const std::string& what) : Error("authentication failure: " + what) {}
};

class InvalidPublicKey : public Error {
public:
  explicit InvalidPublicKey(const std::string& what) : Error("invalid public key: " + what) {}
};

class QnameOversize : public Error {
public:
  explicit QnameOversize(const std::string& what) : Error("query name oversize: " + what) {}
};

class NotOdnsQuery : public Error {
public:
  explicit NotOdnsQuery(const std::string& what) : Error("not an odns query: " + what) {}
};

class MalformedOdnsQname : public Error {
public:
  explicit MalformedOdnsQname(const std::string& what) : Error("malformed odns qname: " + what) {}
};

class PayloadOversize : public Error {
public:
  explicit PayloadOversize(const std::string& what) : Error("payload oversize: " + what) {}
};

// --- services ---
class BootstrapTimeout : public Error {
public:
  explicit BootstrapTimeout(const std::string& what) : Error("bootstrap timeout: " + what) {}
};

class IdentityVerificationFailure : public Error {
public:
  explicit IdentityVerificationFailure(const std::string& what)
      : Error("identity verification failure: " + what) {}
};

class UpstreamTimeout : public Error {
public:
  explicit UpstreamTimeout(const std::string& what) : Error("upstream timeout: " + what) {}
};

class NoSafeUpstream : public Error {
public:
  explicit NoSafeUpstream(const std::string& what) : Error("no safe upstream: " + what) {}
};

class ProbeTimeout : public Error {
public:
  explicit ProbeTimeout(const std::string& what) : Error("probe timeout: " + what) {}
};

class ObserverUnreachable : public Error {
public:
  explicit ObserverUnreachable(const std::string& what) : Error("observer unreachable: " + what) {}
};

// --- trace / config ---
class FileNotFound : public Error {
public:
  explicit FileNotFound(const std::string& what) : Error("file not found: " + what) {}
};

class EmptyTrace : public Error {
public:
  explicit EmptyTrace(const std::string& what) : Error("empty trace: " + what) {}
};

class InvariantViolation : public Error {
public:
  explicit InvariantViolation(const std::string& what) : Error("invariant violation: " + what) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

class NetworkError : public Error {
public:
  explicit NetworkError(const std::string& what) : Error("network error: " + what) {}
};

}  // namespace odns
