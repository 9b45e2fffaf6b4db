#pragma once

#include <string>

#include "defidx/channels.hpp"
#include "defidx/decouple.hpp"

namespace defidx {

/// JSON text with sorted keys. Infinite counts and non-finite reals are
/// written as the string "inf".
std::string to_json(const DefectCertificate& certificate, int indent = 2);
std::string to_json(const ChannelSpectrum& spectrum, int indent = 2);

/// Human-readable summary.
std::string to_text(const DefectCertificate& certificate);
std::string to_text(const ChannelSpectrum& spectrum);

}  // namespace defidx
