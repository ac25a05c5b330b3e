#pragma once

// Umbrella header: the whole library in one include.

#include "sealgate/attacks.hpp"
#include "sealgate/bench_builder.hpp"
#include "sealgate/chat_template.hpp"
#include "sealgate/classifiers.hpp"
#include "sealgate/digest.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/endpoint_classifiers.hpp"
#include "sealgate/errors.hpp"
#include "sealgate/evaluation.hpp"
#include "sealgate/gateway.hpp"
#include "sealgate/http_translation.hpp"
#include "sealgate/jsonl.hpp"
#include "sealgate/translation.hpp"
#include "sealgate/version.hpp"
