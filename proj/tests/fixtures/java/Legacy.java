// no package
import java.io.*;

@SuppressWarnings("unused")
final class Legacy {
    /* a "string" in a comment { */
    static int[] table()[] {
        return null;
    }

    abstract static class Base<K, V> {
        protected abstract V get(K key) throws IOException;

        @Deprecated
        protected
        Base() {
        }
    }

    static String weird(java.util.Map<String, java.util.List<Integer>> m, final char c) {
        char open = '{';
        String s = "\"{\"";
        return s + open + c;
    }
}

@interface Marker {
    String value() default "x";
}

class Second {
    void only() {}
}
