#pragma once

// Generated by tests/oracles/kpo_oracles.py (numpy/scipy, DOP853 at rtol 1e-12).
// Do not edit by hand.

namespace oracle {

// qubit splitting at K=3.1, P=3.13, Delta=1.0 MHz (dim 60)
inline constexpr double kSplittingMHz = 0.31888489419584765;
// distance to the nearest non-qubit level over K
inline constexpr double kGapOverK = 1.3598872594055558;
// |<+Cat|U|0>|^2 for the 300 ns ramp, in-phase CD
inline constexpr double kMappingFidelityEven = 0.62252306772400412;
// |<-Cat|U|1>|^2
inline constexpr double kMappingFidelityOdd = 0.9996851114085209;
// arg<-Cat|U|1> - arg<+Cat|U|0>
inline constexpr double kMappingRelativePhase = -0.7726657798605201;
// noiseless mapping process fidelity after the virtual Z
inline constexpr double kMappingProcessFidelity = 0.79999058318678595;
inline constexpr double kMappingChiXX = 1.9615370463794822e-33;
inline constexpr double kMappingChiZZ = 0.011113506379476557;
// calibrated X/2 duration at beta = 0.65 MHz
inline constexpr double kXHalfDurationUs = 0.082852252885446898;
// overlap reached by the calibrated X/2 on |+Cat>
inline constexpr double kXHalfOverlap = 0.97999354791895021;
// chirp depth giving +pi/2 in 500 ns
inline constexpr double kZHalfDepthRadPerUs = 26.893664835436045;
// X/2 process fidelity at kappa = 0.1 / us
inline constexpr double kXHalfFidelityLossy = 0.9566536897322826;
// Z/2 process fidelity at kappa = 0.1 / us
inline constexpr double kZHalfFidelityLossy = 0.91075455234774116;
inline constexpr double kZHalfChiXX = 0.033439516776087835;
inline constexpr double kZHalfChiYY = 0.015857413237215821;
// diagonal of the X/2 error process U^dagger o E
inline constexpr double kXHalfErrorXX = 0.011410463473119527;
inline constexpr double kXHalfErrorYY = 0.0010310204908187408;
inline constexpr double kXHalfErrorZZ = 0.0026996613569872929;
// diagonal of the Z/2 error process
inline constexpr double kZHalfErrorXX = 0.037780121835845532;
inline constexpr double kZHalfErrorYY = 0.011516808177458121;
inline constexpr double kZHalfErrorZZ = 0.00053714821408204494;
// P(-Cat) after 1 us from |+Cat> at kappa = 0.1 / us
inline constexpr double kRelaxMinusCatAt1us = 0.12018157536169745;
// parity, Delta_d = +0.5 MHz, t = 300 ns, from |+Cat>
inline constexpr double kCatRabiParity0 = 0.3073556291162034;
// parity, Delta_d = -0.5 MHz, t = 300 ns
inline constexpr double kCatRabiParity1 = 0.29824878141267852;
// parity, Delta_d = +1.5 MHz, t = 700 ns
inline constexpr double kCatRabiParity2 = 0.83232239924105333;

}  // namespace oracle
