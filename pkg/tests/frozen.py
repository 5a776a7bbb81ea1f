"""Frozen oracle values; regenerate with tests/oracles/compute_frozen.py."""

A_P2 = 1.1513878188659973233
B_P2 = -0.65138781886599732328
UPSILON_P2_HALF = 0.79798350197754746902
UPSILON_PRIME_P2_HALF = -0.44076250658157523694
K_P1_5 = 0.6236685020703986341
C_B1_5 = 0.34273948146080516441
K_P2 = 1.0703240299833974449
C_B2 = 0.64563569658609923945
K_P2_5 = 1.3652108772710913224
C_B2_5 = 0.85309771187740587075
SDS_R_MINUS = 0.20914884844131658235
SDS_R_PLUS = 0.87888506624997283234
CLIFFORD_L3 = -0.35769355294990110841
U_L3_P1_5_R0_3 = 13.896892070024640321
U_L0_3_P2_5_R1 = 1.4424816309692637775
R_L3_P1_5_T0 = 0.77412805552768469674
ALPHA_L3_P1_5_T0 = 0.58734333444412669325
MU_L3_P1_5_T0 = 0.72290353250394082537
EXP_LAMBDA_L3_P1_5_T0 = 0.022916067374882023391
R_L0_3_P2_5_T1 = 2.4698780165116645526
ALPHA_L0_3_P2_5_T1 = 0.28892602610345956871
MU_L0_3_P2_5_T1 = 0.40104100906529975899
EXP_LAMBDA_L0_3_P2_5_T1 = 0.043549805214898913665
R_L3_P2_TM2 = 0.13411267636614951257
ALPHA_L3_P2_TM2 = 0.98201379003790844197
MU_L3_P2_TM2 = 0.986500106327043616
EXP_LAMBDA_L3_P2_TM2 = 0.0052759975050771345808
