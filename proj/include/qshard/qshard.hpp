#pragma once

#include "qshard/density.hpp"
#include "qshard/dense_reference.hpp"
#include "qshard/grover.hpp"
#include "qshard/inprocess.hpp"
#include "qshard/multiverse.hpp"
#include "qshard/qft.hpp"
#include "qshard/shor.hpp"
#include "qshard/socket_transport.hpp"
#include "qshard/statevector.hpp"
#include "qshard/wigner.hpp"
#include "qshard/wire.hpp"
