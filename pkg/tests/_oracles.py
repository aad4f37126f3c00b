"""Frozen oracle values; regenerate with make_oracles.py. Do not edit."""

# 1-d Ornstein-Uhlenbeck control roots, kappa=1, sigma=1, gamma=0.1,
# running cost |x| (mpmath pipeline, dps=30, secant-refined)
OU_ROOTS = {
    "singular_discounted_r1": 0.4527199646577050149951,
    "singular_discounted_r0.1": 0.5211907804744129322857,
    "singular_discounted_r0.01": 0.5337326646687147072266,
    "singular_discounted_r0.001": 0.5350834550633488614954,
    "constrained_discounted_r1_lam1": 0.1700017710624875525049,
    "constrained_discounted_r1_lam10": 0.285489878310871252818,
    "constrained_discounted_r1_lam20": 0.3231382725683026400666,
    "constrained_discounted_r1_lam100": 0.3876850566986493364413,
    "constrained_discounted_r1_lam1000": 0.4309184712200837170475,
    "singular_ergodic_threshold": 0.5352347055779203478091,
    "singular_ergodic_beta": 0.4817112350201283130282,
    "constrained_ergodic_lam20_threshold": 0.3979421155477453924662,
    "constrained_ergodic_lam20_beta": 0.487218623259162549772,
    "constrained_ergodic_lam20_beta_alt": 0.487218623259162549772,
}

# log D_nu(z) and (log D_nu)'(z), mpmath dps=30
PCF_TABLE = [
    (0, -8.0, -16.0, 4.0),
    (0, -3.0, -2.25, 1.5),
    (0, -0.64, -0.1024000000000000042633, 0.3200000000000000066613),
    (0, 0.0, 0.0, 0.0),
    (0, 0.7, -0.1224999999999999844569, -0.3499999999999999777955),
    (0, 2.3, -1.322499999999999795719, -1.149999999999999911182),
    (0, 8.0, -16.0, -4.0),
    (-0.25, -8.0, 14.08197784463525697331, -3.903483923692145138283),
    (-0.25, -3.0, 1.179796732995174236251, -1.118323881068484951597),
    (-0.25, -0.64, 0.2403782423954696692759, -0.108880231358409201028),
    (-0.25, 0.0, 0.1248920498657667422096, -0.2692768431830252502162),
    (-0.25, 0.7, -0.1508481218442361626394, -0.5282499948891540617221),
    (-0.25, 2.3, -1.554086451219076918475, -1.241999124597685366601),
    (-0.25, 8.0, -16.52223861078627586856, -4.030670414463471401403),
    (-1, -8.0, 16.91893853320467211968, -4.000000000000005052271),
    (-1, -3.0, 3.167587723239924547981, -1.504437839042125663793),
    (-1, -0.64, 0.7187643893354864147332, -0.7599191190378065279057),
    (-1, 0.0, 0.2257913526447274323631, -0.7978845608028653558799),
    (-1, 0.7, -0.3775292283268588530968, -0.9404993394581665353088),
    (-1, 2.3, -2.293822266068481533345, -1.491434830894679736812),
    (-1, 8.0, -18.09449862670987715372, -4.121368112236112680654),
    (-2.5, -8.0, 19.7592777261459125347, -4.186034869337961555236),
    (-2.5, -3.0, 4.574052037877987743494, -1.971764491919310239109),
    (-2.5, -0.64, 0.7037795643986171466242, -1.432078684149040239963),
    (-2.5, 0.0, -0.209667911754745993742, -1.433966392458374986091),
    (-2.5, 0.7, -1.236101541825559640411, -1.510829167673346360501),
    (-2.5, 2.3, -3.937621403691657709118, -1.908391561484231257846),
    (-2.5, 8.0, -21.26311855995700845459, -4.297239438986439844207),
    (-11, -8.0, 23.23446924340800658337, -5.109845944821830843524),
    (-11, -3.0, 1.986362166039277250415, -3.542144118653118296588),
    (-11, -0.64, -5.95149310531847618168, -3.250382021447921871359),
    (-11, 0.0, -8.027436292937045108971, -3.242197580405294144528),
    (-11, 0.7, -10.30424363424597946937, -3.269160445703486331063),
    (-11, 2.3, -15.66704310200539512862, -3.46373355242735861248),
    (-11, 8.0, -39.75161754476190982649, -5.185317963212010890856),
    (-50.5, -8.0, -14.73808159236764797833, -8.108933989970987572922),
    (-50.5, -3.0, -52.76400675203847311051, -7.221388133595810593556),
    (-50.5, -0.64, -69.59812125305915666035, -7.076883802083602726944),
    (-50.5, 0.0, -74.12475031727252376053, -7.071244546611104892729),
    (-50.5, 0.7, -79.07725311599304605742, -7.081644917396649894518),
    (-50.5, 2.3, -90.46653699782035248629, -7.169732059244678792917),
    (-50.5, 8.0, -133.6502155708449499621, -8.139234688193331472623),
    (-101, -8.0, -100.6662217360404306182, -10.78496579470997188194),
    (-101, -3.0, -152.7279365201311766004, -10.1329747387455046513),
    (-101, -0.64, -176.4924801344076042269, -10.02934138811673656168),
    (-101, 0.0, -182.909334627125570106, -10.02503085839843299597),
    (-101, 0.7, -189.9285860279897407398, -10.03200797939389105185),
    (-101, 2.3, -206.0206415188144103238, -10.09359579506604598353),
    (-101, 8.0, -265.2263111273156187345, -10.80213262808394450499),
    (-501, -8.0, -1127.190143289077290687, -22.72470516226773140516),
    (-501, -3.0, -1239.941515786559764173, -22.42134691118362659149),
    (-501, -0.64, -1292.787806247301306021, -22.373991563860866028),
    (-501, 0.0, -1307.106235578194560553, -22.37186290297902167836),
    (-501, 0.7, -1322.767239590172527867, -22.37477532672489952179),
    (-501, 2.3, -1358.584831492017128838, -22.4019734794088049399),
    (-501, 8.0, -1487.038061678851954958, -22.72857737136874534035),
    (-1001, -8.0, -2703.963915883879562285, -31.88161521915868030041),
    (-1001, -3.0, -2862.751214399155134963, -31.66585605302456583431),
    (-1001, -0.64, -2937.434300359112774156, -31.63222197033670360714),
    (-1001, 0.0, -2957.678257387484011678, -31.63068328281039564358),
    (-1001, 0.7, -2979.820218113971057004, -31.63270707911469109917),
    (-1001, 2.3, -3030.445183418739194489, -31.65186868075708755354),
    (-1001, 8.0, -3211.400531626280452008, -31.88358275377726436232),
]
