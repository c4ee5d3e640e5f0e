package com.acme.util;

import java.util.List;

public class Calc {
    private List<Integer> history;

    public Calc() {
        history = List.of();
    }

    public int add(int a, int b) {
        return a + b;
    }

    public int sub(int a, int b) {
        return a - b;
    }
}
