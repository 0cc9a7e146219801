#include "risim/bessel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace risim {
namespace {

// Clenshaw evaluation of an n-term Chebyshev series; only half of cs[0] is
// summed, matching the SLATEC coefficient convention.
double chebyshev_eval(double x, const double* cs, int n) {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    const double twox = 2.0 * x;
    for (int i = n - 1; i >= 0; --i) {
        b2 = b1;
        b1 = b0;
        b0 = twox * b1 - b2 + cs[i];
    }
    return 0.5 * (b0 - b2);
}

// SLATEC FNLIB expansions, truncated to the term counts that reach double
// precision (the full 31-digit tables carry no extra accuracy here).
constexpr double kBj0[12] = {
    0.10025416196893913701073127264074,
    -0.66522300776440513177678757831124,
    0.2489837034982813137046046872668,
    -0.033252723170035769653884341503854,
    0.0023114179304694015462904924117729,
    -9.9112774199508092339048519336549e-5,
    2.8916708643998808884733903747078e-6,
    -6.1210858663032635057818407481516e-8,
    9.8386507938567841324768748636415e-10,
    -1.2423551597301765145515897006836e-11,
    1.2654336302559045797915827210363e-13,
    -1.0619456495287244546914817512959e-15,
};

constexpr double kBy0[13] = {
    -0.01127783939286557321793980546028,
    -0.1283452375604203460480884531838,
    -0.1043788479979424936581762276618,
    0.02366274918396969540924159264613,
    -0.002090391647700486239196223950342,
    1.039754539390572520999246576381e-4,
    -3.369747162423972096718775345037e-6,
    7.729384267670667158521367216371e-8,
    -1.324976772664259591443476068964e-9,
    1.764823261540452792100389363158e-11,
    -1.881055071580196200602823012069e-13,
    1.641865485366149502792237185749e-15,
    -1.19565943860460608574599100672e-17,
};

// Amplitude and phase expansions for 4 < x <= 8 ...
constexpr double kBm0[15] = {
    0.09211656246827742712573767730182,
    -0.001050590997271905102480716371755,
    1.470159840768759754056392850952e-5,
    -5.058557606038554223347929327702e-7,
    2.787254538632444176630356137881e-8,
    -2.062363611780914802618841018973e-9,
    1.870214313138879675138172596261e-10,
    -1.969330971135636200241730777825e-11,
    2.325973793999275444012508818052e-12,
    -3.009520344938250272851224734482e-13,
    4.194521333850669181471206768646e-14,
    -6.219449312188445825973267429564e-15,
    9.718260411336068469601765885269e-16,
    -1.588478585701075207366635966937e-16,
    2.700072193671308890086217324458e-17,
};

constexpr double kBt02[16] = {
    -0.24548295213424597462050467249324,
    0.0012544121039084615780785331778299,
    -3.1253950414871522854973446709571e-5,
    1.4709778249940831164453426969314e-6,
    -9.9543488937950033643468850351158e-8,
    8.5493166733203041247578711397751e-9,
    -8.6989759526554334557985512179192e-10,
    1.0052099533559791084540101082153e-10,
    -1.2828230601708892903483623685544e-11,
    1.7731700781805131705655750451023e-12,
    -2.6174574569485577488636284180925e-13,
    4.0828351389972059621966481221103e-14,
    -6.6751668239742720054606749554261e-15,
    1.1365761393071629448392469549951e-15,
    -2.0051189620647160250559266412117e-16,
    3.6497978794766269635720591464106e-17,
};

// ... and for x > 8.
constexpr double kBm02[13] = {
    0.0950041514522838136933086133556,
    -3.801864682365670991748081566851e-4,
    2.258339301031481192951829927224e-6,
    -3.895725802372228764730621412605e-8,
    1.246886416512081697930990529725e-9,
    -6.065949022102503779803835058387e-11,
    4.008461651421746991015275971045e-12,
    -3.350998183398094218467298794574e-13,
    3.377119716517417367063264341996e-14,
    -3.964585901635012700569356295823e-15,
    5.286111503883857217387939744735e-16,
    -7.852519083450852313654640243493e-17,
    1.280300573386682201011634073449e-17,
};

constexpr double kBth0[14] = {
    -0.24901780862128936717709793789967,
    4.8550299609623749241048615535485e-4,
    -5.4511837345017204950656273563505e-6,
    1.3558673059405964054377445929903e-7,
    -5.569139890222762622758321841492e-9,
    3.2609031824994335304004205719468e-10,
    -2.4918807862461341125237903877993e-11,
    2.3449377420882520554352413564891e-12,
    -2.6096534444310387762177574766136e-13,
    3.3353140420097395105869955014923e-14,
    -4.7890000440572684646750770557409e-15,
    7.5956178436192215972642568545248e-16,
    -1.3131556016891440382773397487633e-16,
    2.4483618345240857495426820738355e-17,
};

constexpr double kPi4 = 0.785398163397448309615660845819876;
constexpr double kTwoOverPi = 0.636619772367581343075535053490057;

struct AmplPhase {
    double ampl;
    double theta;
};

AmplPhase asymptotic_parts(double x) {
    const double xmax = 0.5 / std::numeric_limits<double>::epsilon();
    if (x > xmax)
        throw std::domain_error("bessel: argument too large, phase has no precision");
    AmplPhase r;
    if (x <= 8.0) {
        const double z = (128.0 / (x * x) - 5.0) / 3.0;
        r.ampl = (chebyshev_eval(z, kBm0, 15) + 0.75) / std::sqrt(x);
        r.theta = x - kPi4 + chebyshev_eval(z, kBt02, 16) / x;
    } else {
        const double z = 128.0 / (x * x) - 1.0;
        r.ampl = (chebyshev_eval(z, kBm02, 13) + 0.75) / std::sqrt(x);
        r.theta = x - kPi4 + chebyshev_eval(z, kBth0, 14) / x;
    }
    return r;
}

}  // namespace

double bessel_j0(double x) {
    x = std::abs(x);
    if (x <= 4.0) {
        const double xsml = std::sqrt(8.0 * std::numeric_limits<double>::epsilon());
        if (x < xsml) return 1.0;
        return chebyshev_eval(0.125 * x * x - 1.0, kBj0, 12);
    }
    const AmplPhase ap = asymptotic_parts(x);
    return ap.ampl * std::cos(ap.theta);
}

double bessel_y0(double x) {
    if (!(x > 0.0))
        throw std::domain_error("bessel_y0: argument must be positive");
    if (x < 4.0) {
        const double xsml = std::sqrt(4.0 * std::numeric_limits<double>::epsilon());
        const double y = x > xsml ? x * x : 0.0;
        return kTwoOverPi * std::log(0.5 * x) * bessel_j0(x) + 0.375 +
               chebyshev_eval(0.125 * y - 1.0, kBy0, 13);
    }
    const AmplPhase ap = asymptotic_parts(x);
    return ap.ampl * std::sin(ap.theta);
}

Complex hankel0_second_kind(double x) {
    if (!(x > 0.0))
        throw std::domain_error("hankel0_second_kind: argument must be positive");
    return {bessel_j0(x), -bessel_y0(x)};
}

}  // namespace risim
