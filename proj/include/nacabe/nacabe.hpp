#pragma once

// Umbrella header for the NAC-ABE access-control stack: the in-memory NDN
// substrate, the ABE engine, trust-schema validation, the protocol roles,
// and the scenario machinery.

#include "abe/abe.hpp"
#include "core/certificate.hpp"
#include "core/forwarder.hpp"
#include "protocol/authority.hpp"
#include "protocol/decryptor.hpp"
#include "protocol/encryptor.hpp"
#include "scenario/bench.hpp"
#include "scenario/runner.hpp"
#include "schema/validator.hpp"
