#pragma once

#include <qfam/bigint.hpp>
#include <qfam/classno.hpp>
#include <qfam/error.hpp>
#include <qfam/intkit.hpp>
#include <qfam/invariants.hpp>
#include <qfam/padic.hpp>
#include <qfam/pellseq.hpp>
#include <qfam/quadfield.hpp>
#include <qfam/scan.hpp>
