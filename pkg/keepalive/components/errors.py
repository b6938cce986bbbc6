# Copyright (C) 2021 Intel Corporation
#
# SPDX-License-Identifier: MIT

from attr import attrib, attrs


class KeepaliveError(Exception):
    exit_code = 1


class ConfigError(KeepaliveError):
    exit_code = 2

@attrs
class InvalidParamsError(ConfigError, ValueError):
    name = attrib()
    value = attrib()
    requirement = attrib()

    def __str__(self):
        return "Invalid value of '%s': %s (expected %s)" % \
            (self.name, self.value, self.requirement)

@attrs
class MissingParamsError(ConfigError):
    policy = attrib()

    def __str__(self):
        return "Policy '%s' depends on the arrival history and requires " \
            "process parameters" % (self.policy, )

@attrs
class ConfigKeyError(ConfigError, KeyError):
    key = attrib()
    reason = attrib(default='unknown key')

    def __str__(self):
        return "Config key '%s': %s" % (self.key, self.reason)


class DataError(KeepaliveError):
    exit_code = 3

@attrs
class DomainError(DataError, ValueError):
    message = attrib()

    def __str__(self):
        return self.message

@attrs
class InsufficientDataError(DataError):
    required = attrib()
    found = attrib()
    what = attrib(default='arrivals')

    def __str__(self):
        return "Not enough %s: required at least %s, found %s" % \
            (self.what, self.required, self.found)

@attrs
class TraceLoadError(DataError):
    path = attrib()
    offenders = attrib(converter=list, factory=list)

    def __str__(self):
        lines = ["Failed to load trace '%s':" % self.path]
        for line, reason in self.offenders[:20]:
            if line is None:
                lines.append("  %s" % reason)
            else:
                lines.append("  line %s: %s" % (line, reason))
        if 20 < len(self.offenders):
            lines.append("  ... and %s more" % (len(self.offenders) - 20))
        return '\n'.join(lines)


class NumericError(KeepaliveError):
    exit_code = 4

@attrs
class CapExceededError(NumericError):
    cap = attrib()
    time = attrib()

    def __str__(self):
        return "Simulation exceeded the safety cap of %s events at t=%s; " \
            "the process is likely non-stationary" % (self.cap, self.time)

@attrs
class IntegrationError(NumericError):
    lower = attrib()
    upper = attrib()
    estimate = attrib()
    abserr = attrib()
    message = attrib(default='')

    def __str__(self):
        return "Quadrature did not converge on [%s, %s]: estimate %s, " \
            "abs. error %s. %s" % (self.lower, self.upper,
                self.estimate, self.abserr, self.message)

@attrs
class FitFailedError(NumericError):
    restarts = attrib()

    def __str__(self):
        return "All %s optimizer restarts ended in an infeasible point" % \
            (self.restarts, )
