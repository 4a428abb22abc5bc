#pragma once

#include "amplify.hpp"
#include "analysis.hpp"
#include "attacker.hpp"
#include "auth.hpp"
#include "bits.hpp"
#include "channel.hpp"
#include "encode.hpp"
#include "error.hpp"
#include "frame.hpp"
#include "keys.hpp"
#include "phys.hpp"
#include "protocol.hpp"
#include "random.hpp"
#include "reconcile.hpp"
#include "session.hpp"
#include "socket.hpp"
#include "wire.hpp"
