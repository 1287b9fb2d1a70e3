package io.delta;

/*
 * Utility class.
 */
public class U0 {
    // step

    /* inline */ int a0 = 0; // trailing
    int v1 = 1;
    int v2 = 2;
    int v3 = 3;
    int v4 = 4;
    int v5 = 5;
    int v6 = 6;
    // step
    int v7 = 7;
    int v8 = 8;
    int v9 = 9;
    int v10 = 10;

    int v11 = 11;
    int v12 = 12;
    /* inline */ int a13 = 13; // trailing
    // step
    int v14 = 14;
    int v15 = 15;
    int v16 = 16;
    int v17 = 17;
    int v18 = 18;
    int v19 = 19;
    int v20 = 20;
    // step
    int v21 = 21;

    int v22 = 22;
    int v23 = 23;
    int v24 = 24;
    int v25 = 25;
    /* inline */ int a26 = 26; // trailing
    int v27 = 27;
    // step
    int v28 = 28;
    int v29 = 29;
    int v30 = 30;
    int v31 = 31;
    int v32 = 32;

    int v33 = 33;
    int v34 = 34;
    // step
    int v35 = 35;
    int v36 = 36;
    int v37 = 37;
    int v38 = 38;
    /* inline */ int a39 = 39; // trailing
    int v40 = 40;
    int v41 = 41;
    // step
    int v42 = 42;
    int v43 = 43;

    int v44 = 44;
    int v45 = 45;
    int v46 = 46;
    int v47 = 47;
    int v48 = 48;
    // step
    int v49 = 49;
    int v50 = 50;
    int v51 = 51;
    /* inline */ int a52 = 52; // trailing
    int v53 = 53;
    int v54 = 54;

    int v55 = 55;
    // step
    int v56 = 56;
    int v57 = 57;
    int v58 = 58;
    int v59 = 59;
    int v60 = 60;
    int v61 = 61;
    int v62 = 62;
    // step
    int v63 = 63;
    int v64 = 64;
    /* inline */ int a65 = 65; // trailing

    int v66 = 66;
    int v67 = 67;
    int v68 = 68;
    int v69 = 69;
    // step
    int v70 = 70;
}
